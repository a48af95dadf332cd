"""Time integration of the frequency-truncated system on the periodic grid."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .container import write_container
from .fields import Field, Grid, SpaceTimeSample, StateBundle
from .multipliers import dyadic_scales, psi_N, sharp_mask
from .system import SystemParams, nonlinear_hat

INSTABILITY_THRESHOLD = 1e6
INTEGRATORS = ("InteractionRK4", "StrangSplit")


class InstabilityError(RuntimeError):
    """NaN, overflow or sup-norm above the threshold during stepping."""

    def __init__(self, step: int, t: float, diagnostic: dict, partial=None):
        super().__init__(f"instability at step {step} (t = {t:.6g}); diagnostic {diagnostic}")
        self.step = step
        self.t = t
        self.diagnostic = diagnostic
        self.partial = partial


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    T: float
    integrator: str = "InteractionRK4"
    dealias: bool = True
    cadence: int = 1
    nonlinear: bool = True
    diag_s: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.cadence < 1:
            raise ValueError("cadence must be at least 1")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


def linear_flow(f: Field, sigma: float, t: float) -> Field:
    """Solution operator of (i d_t + sigma Lap) f = 0: multiply by exp(-i sigma |xi|^2 t)."""
    return Field(f.grid, f.hat * np.exp(-1j * sigma * f.grid.xi2 * t), spectral=True)


class _Kernel:
    """Array-level right-hand side on stacked spectral data (3, d, M, ..., M)."""

    def __init__(self, grid: Grid, p: SystemParams, dealias: bool, nonlinear: bool):
        self.grid = grid
        self.p = p
        self.dealias = dealias
        self.nonlinear = nonlinear
        self.sig = np.array(p.sigmas).reshape((3, 1) + (1,) * grid.d)
        mask = sharp_mask(grid, p.K)
        if dealias:
            mask = mask & (grid.xi_abs <= grid.dealias_cutoff * (1 + 1e-12))
        self.mask = mask
        self._cache: dict[float, np.ndarray] = {}

    def expo(self, h: float) -> np.ndarray:
        e = self._cache.get(h)
        if e is None:
            e = np.exp(-1j * self.sig * self.grid.xi2[None, None] * h)
            self._cache[h] = e
        return e

    def rhs(self, a: np.ndarray) -> np.ndarray:
        """Nonlinear part of d_t of the spectral state."""
        if not self.nonlinear:
            return np.zeros_like(a)
        n1, n2, n3 = nonlinear_hat(self.grid, a[0], a[1], a[2], self.p.K, self.dealias)
        return np.stack([1j * n1, 1j * n2, -1j * n3])

    def step(self, a: np.ndarray, h: float, integrator: str) -> np.ndarray:
        if integrator == "InteractionRK4":
            e2, e1 = self.expo(h / 2), self.expo(h)
            k1 = self.rhs(a)
            ea = e2 * a
            k2 = self.rhs(ea + (h / 2) * e2 * k1)
            k3 = self.rhs(ea + (h / 2) * k2)
            k4 = self.rhs(e1 * a + h * e2 * k3)
            return e1 * a + (h / 6) * (e1 * k1 + 2 * e2 * (k2 + k3) + k4)
        e2 = self.expo(h / 2)
        b = e2 * a
        b = b + h * self.rhs(b + (h / 2) * self.rhs(b))
        return e2 * b

    def check(self, a: np.ndarray, n: int, t: float, h: float, partial=None):
        bound = float(np.sum(np.abs(a))) / self.grid.M**self.grid.d
        if not np.isfinite(bound) or bound > INSTABILITY_THRESHOLD:
            sup = float(np.max(np.abs(self.grid.ifft(a)))) if np.isfinite(bound) else math.inf
            if not np.isfinite(sup) or sup > INSTABILITY_THRESHOLD:
                xi_max = float(np.max(self.grid.xi_abs[self.mask]))
                diag = {
                    "sup_norm": sup,
                    "dt_sigma_xi2": h * max(abs(s) for s in self.p.sigmas) * xi_max**2,
                    "dt_xi_sup": h * xi_max * (sup if np.isfinite(sup) else math.inf),
                }
                raise InstabilityError(n, t, diag, partial)


def truncate_state(state: StateBundle, K=math.inf, dealias_grid: bool = False) -> StateBundle:
    m = sharp_mask(state.grid, K)
    if dealias_grid:
        m = m & (state.grid.xi_abs <= state.grid.dealias_cutoff * (1 + 1e-12))
    return state.map(lambda f: Field(f.grid, f.hat * m, spectral=True))


def step(state: StateBundle, p: SystemParams, cfg: SolverConfig) -> StateBundle:
    """Advance one step of size cfg.dt."""
    kern = _Kernel(state.grid, p, cfg.dealias, cfg.nonlinear)
    a = kern.step(state.stacked_hat() * kern.mask, cfg.dt, cfg.integrator)
    kern.check(a, 1, state.time + cfg.dt, cfg.dt)
    return StateBundle.from_stacked_hat(state.grid, a * kern.mask, state.time + cfg.dt)


def conserved_quantities(state: StateBundle) -> dict[str, float]:
    """Q1 = |u|^2 + |v|^2 and Q2 = |v|^2 - |w|^2 in L^2."""
    g = state.grid
    m = [float(np.sum(np.abs(f.hat) ** 2)) * g.weight / g.M**g.d for f in state.fields]
    return {"Q1": m[0] + m[1], "Q2": m[1] - m[2]}


def _masses(grid: Grid, a: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(a) ** 2, axis=tuple(range(1, a.ndim))) * grid.weight / grid.M**grid.d


@dataclass
class Trajectory:
    grid: Grid
    params: SystemParams
    config: SolverConfig
    times: np.ndarray
    hats: np.ndarray  # (n_snap, 3, d, M, ..., M) spectral
    diagnostics: dict = field(default_factory=dict)
    status: str = "ok"

    @property
    def snapshots(self) -> list[StateBundle]:
        return [StateBundle.from_stacked_hat(self.grid, h, t) for t, h in zip(self.times, self.hats)]

    def __len__(self):
        return len(self.times)

    def snapshot(self, k: int) -> StateBundle:
        return StateBundle.from_stacked_hat(self.grid, self.hats[k], float(self.times[k]))

    def diagnostics_rows(self) -> list[dict]:
        keys = ["t", "Q1", "Q2", "Hs_u", "Hs_v", "Hs_w", "drift1", "drift2"]
        cols = [self.times] + [self.diagnostics[k] for k in keys[1:]]
        return [dict(zip(keys, map(float, row))) for row in zip(*cols)]

    def write_csv(self, path) -> Path:
        path = Path(path)
        rows = self.diagnostics_rows()
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) for k, v in r.items()})
        return path

    def to_sample(self) -> SpaceTimeSample:
        """All three fields as components of one space-time sample (physical values)."""
        n = len(self.times)
        if n < 2:
            raise ValueError("a space-time sample needs at least two snapshots")
        phys = self.grid.ifft(self.hats.reshape((n, 3 * self.grid.d) + self.grid.shape))
        return SpaceTimeSample(self.grid, float(self.times[0]), float(self.times[1] - self.times[0]), phys)

    def write_container(self, path) -> Path:
        """Binary container; a single snapshot is stored as one frame holding all components."""
        meta = {"params": self.params.to_json(), "times": [float(t) for t in self.times],
                "components": [f"{n}{j}" for n in "uvw" for j in range(self.grid.d)],
                "status": self.status}
        if len(self.times) < 2:
            frame = Field(self.grid, self.hats[0].reshape((3 * self.grid.d,) + self.grid.shape), spectral=True)
            return write_container(path, frame, meta)
        return write_container(path, self.to_sample(), meta)


def _diagnose(grid: Grid, hats: np.ndarray, s: float) -> dict:
    w = (1.0 + grid.xi2) ** s
    norm = grid.weight / grid.M**grid.d
    mass = np.sum(np.abs(hats) ** 2, axis=tuple(range(2, hats.ndim))) * norm  # (n, 3)
    hs = np.sqrt(np.sum(w * np.abs(hats) ** 2, axis=tuple(range(2, hats.ndim))) * norm)
    q1 = mass[:, 0] + mass[:, 1]
    q2 = mass[:, 1] - mass[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.where(q1[0] != 0, np.abs(q1 - q1[0]) / abs(q1[0]), np.abs(q1 - q1[0]))
        d2 = np.where(q2[0] != 0, np.abs(q2 - q2[0]) / abs(q2[0]), np.abs(q2 - q2[0]))
    scales = dyadic_scales(grid)
    shell = np.stack([
        np.sum(np.abs(hats * psi_N(grid.xi_abs, N)) ** 2, axis=tuple(range(1, hats.ndim))) * norm
        for N in scales], axis=1)
    return {"Q1": q1, "Q2": q2, "Hs_u": hs[:, 0], "Hs_v": hs[:, 1], "Hs_w": hs[:, 2],
            "drift1": d1, "drift2": d2, "scales": np.array(scales), "shell_mass": shell}


def simulate(data: StateBundle, p: SystemParams, cfg: SolverConfig) -> Trajectory:
    """Run to cfg.T from J_{<=K} data, keeping snapshots every ``cadence`` steps."""
    grid = data.grid
    kern = _Kernel(grid, p, cfg.dealias, cfg.nonlinear)
    a = data.stacked_hat() * kern.mask
    n_steps = cfg.n_steps
    if n_steps and abs(n_steps * cfg.dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise ValueError(f"T = {cfg.T} is not a multiple of dt = {cfg.dt}")
    t0 = data.time
    times, hats = [t0], [a.copy()]
    try:
        # overflow on the way to a blow-up is reported through the instability check
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(1, n_steps + 1):
                a = kern.step(a, cfg.dt, cfg.integrator) * kern.mask
                if n % cfg.cadence == 0 or n == n_steps:
                    kern.check(a, n, t0 + n * cfg.dt, cfg.dt)
                    times.append(t0 + n * cfg.dt)
                    hats.append(a.copy())
    except InstabilityError as exc:
        h = np.stack(hats)
        exc.partial = Trajectory(grid, p, cfg, np.array(times), h, _diagnose(grid, h, cfg.diag_s), "unstable")
        raise
    h = np.stack(hats)
    return Trajectory(grid, p, cfg, np.array(times), h, _diagnose(grid, h, cfg.diag_s))


@dataclass
class PicardResult:
    iterates: list[Trajectory]
    deltas: list[float]
    ratios: list[float]
    diverged: bool = False
    diverged_at: int | None = None

    @property
    def rho(self) -> float:
        """Largest contraction ratio seen across successive iterates."""
        return max(self.ratios) if self.ratios else math.nan


def picard_iterate(data: StateBundle, p: SystemParams, T: float, n_iter: int, n_steps: int = 256,
                   s: float = 0.0, dealias: bool = True) -> PicardResult:
    """Picard iterates of the Duhamel formulation on a uniform time lattice.

    Iterate 0 is the free flow of the truncated data. Iterate n+1 adds the
    composite-trapezoid Duhamel integral of the nonlinearity along iterate n.
    """
    if math.isinf(p.K):
        raise ValueError("Picard iteration needs a finite truncation K")
    if not 0 < T <= 1:
        raise ValueError("T must lie in (0, 1]")
    grid = data.grid
    cfg = SolverConfig(dt=T / n_steps, T=T, dealias=dealias)
    kern = _Kernel(grid, p, dealias, True)
    a0 = data.stacked_hat() * kern.mask
    times = np.linspace(0.0, T, n_steps + 1)
    h = T / n_steps
    phase = np.stack([kern.expo(t) for t in times])  # (n+1, 3, 1, ...)
    w = (1.0 + grid.xi2) ** s
    norm = grid.weight / grid.M**grid.d

    def sup_hs(b):
        return float(np.max(np.sqrt(np.sum(w * np.abs(b) ** 2, axis=tuple(range(1, b.ndim))) * norm)))

    cur = phase * a0[None]
    iterates = [Trajectory(grid, p, cfg, times, cur, {})]
    deltas, ratios = [], []
    diverged, at = False, None
    for it in range(1, n_iter + 1):
        g = np.stack([np.conj(phase[k]) * kern.rhs(cur[k]) for k in range(len(times))])
        integral = np.zeros_like(g)
        integral[1:] = np.cumsum(0.5 * h * (g[1:] + g[:-1]), axis=0)
        nxt = phase * (a0[None] + integral) * kern.mask
        sup = float(np.max(np.abs(grid.ifft(nxt.reshape((-1,) + grid.shape)))))
        if not np.isfinite(sup) or sup > INSTABILITY_THRESHOLD:
            diverged, at = True, it
            break
        deltas.append(sup_hs(nxt - cur))
        if len(deltas) > 1 and deltas[-2] > 0:
            ratios.append(deltas[-1] / deltas[-2])
        cur = nxt
        iterates.append(Trajectory(grid, p, cfg, times, cur, {}))
    return PicardResult(iterates, deltas, ratios, diverged, at)
