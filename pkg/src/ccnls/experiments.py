"""Orchestrated studies: K-refinement, continuity of the flow, slope fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import DataSpec, make_data, sobolev_random_data
from .fields import Grid, StateBundle
from .fitting import loglog_fit
from .multipliers import project_low
from .parallel import parallel_map
from .solver import InstabilityError, SolverConfig, Trajectory, simulate, truncate_state
from .system import SystemParams

__all__ = ["DataSpec", "sobolev_random_data", "RateFit", "rate_fit", "ConvergenceResult",
           "convergence_study", "flow_continuity_probe", "bona_smith_ladder", "MonotonicityError"]

SMOOTH_SLOPE = -3.0


@dataclass(frozen=True)
class RateFit:
    points: tuple[tuple[float, float], ...]   # (log x, log y)
    slope: float
    intercept: float
    residual: float
    stderr: float = 0.0


def rate_fit(points) -> RateFit:
    """Least-squares line through (x, y) pairs in log-log space; needs 4 points."""
    pts = [(float(x), float(y)) for x, y in points]
    f = loglog_fit([x for x, _ in pts], [y for _, y in pts], min_points=4)
    logs = tuple((math.log(x), math.log(y)) for x, y in pts)
    return RateFit(logs, f.slope, f.intercept, f.residual, f.stderr)


class MonotonicityError(RuntimeError):
    def __init__(self, msg: str, result: "ConvergenceResult"):
        super().__init__(msg)
        self.result = result



def _hs_bundle(grid: Grid, a: np.ndarray, s: float) -> float:
    w = (1.0 + grid.xi2) ** s
    return float(np.sqrt(np.sum(w * np.abs(a) ** 2) * grid.weight / grid.M**grid.d))


def trajectory_distance(a: Trajectory, b: Trajectory, s: float = 0.0) -> float:
    """sup over shared snapshot times of the H^s distance of the bundles."""
    tb = {round(float(t), 12): k for k, t in enumerate(b.times)}
    best = 0.0
    for k, t in enumerate(a.times):
        j = tb.get(round(float(t), 12))
        if j is not None:
            best = max(best, _hs_bundle(a.grid, a.hats[k] - b.hats[j], s))
    return best


@dataclass
class ConvergenceResult:
    Ks: list[float]
    errors: list[float]
    K_ref: float
    fit: RateFit | None
    predicted_slope: float
    monotone: bool
    flags: list[str] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [{"K": K, "error": e} for K, e in zip(self.Ks, self.errors)]

    def summary(self) -> dict:
        return {"Ks": self.Ks, "errors": self.errors, "K_ref": self.K_ref,
                "slope": None if self.fit is None else self.fit.slope,
                "intercept": None if self.fit is None else self.fit.intercept,
                "residual": None if self.fit is None else self.fit.residual,
                "predicted_slope": self.predicted_slope, "monotone": self.monotone,
                "flags": self.flags}


def _run_truncated(args):
    data, p, cfg, K = args
    return simulate(truncate_state(data, K), replace(p, K=K), cfg)


def convergence_study(spec: DataSpec, Ks, s: float, p: SystemParams, cfg: SolverConfig,
                      grid: Grid, K_ref: float | None = None, strict: bool = True,
                      jobs: int = 1) -> ConvergenceResult:
    """sup_t ||(u,v,w)_K - (u,v,w)_ref||_{H^0} for each K, against a run at K_ref and dt/4."""
    Ks = sorted(float(K) for K in Ks)
    K_ref = float(K_ref or 2 * max(Ks))
    if K_ref < max(Ks):
        raise ValueError("K_ref must be at least max(K)")
    data = make_data(grid, spec)
    ref_cfg = replace(cfg, dt=cfg.dt / 4, cadence=cfg.cadence * 4)
    jobs_list = [(data, p, ref_cfg, K_ref)] + [(data, p, cfg, K) for K in Ks if K != K_ref]
    try:
        runs = parallel_map(_run_truncated, jobs_list, jobs)
    except InstabilityError as exc:
        exc.diagnostic = {**exc.diagnostic, "study": "convergence", "Ks": Ks}
        raise
    ref, rest = runs[0], iter(runs[1:])
    errors = [0.0 if K == K_ref else trajectory_distance(next(rest), ref, 0.0) for K in Ks]
    pos = [(K, e) for K, e in zip(Ks, errors) if e > 0]
    fit = rate_fit(pos) if len(pos) >= 4 else None
    d = grid.d
    monotone = all(b <= a * 1.05 for a, b in zip(errors, errors[1:]))
    res = ConvergenceResult(Ks, errors, K_ref, fit, -(s - (d + 1) / 2), monotone)
    if fit is not None and fit.slope <= SMOOTH_SLOPE:
        res.flags.append("smooth regime, rate bound vacuous")
    if not monotone:
        res.flags.append("errors not monotone in K")
        if strict:
            raise MonotonicityError(f"errors not monotone in K: {errors}", res)
    return res


def _unit_direction(grid: Grid, seed: int, s: float) -> StateBundle:
    phi = sobolev_random_data(grid, DataSpec("SobolevRandom", s=s + 1.0, seed=seed))
    n = _hs_bundle(grid, phi.stacked_hat(), s)
    return phi.scaled(1.0 / n)


def flow_continuity_probe(spec: DataSpec, eps_list, s: float, p: SystemParams, cfg: SolverConfig,
                          grid: Grid, seed: int = 1, jobs: int = 1) -> dict:
    """Sup-in-time H^s distance of solutions from u_0 and u_0 + eps phi, ||phi||_{H^s} = 1."""
    eps_list = [float(e) for e in eps_list]
    if any(b > a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("perturbation sizes must be decreasing")
    data = truncate_state(make_data(grid, spec), p.K)
    phi = truncate_state(_unit_direction(grid, seed, s), p.K)
    items = [(data, p, cfg, p.K)] + [(data + phi.scaled(e), p, cfg, p.K) for e in eps_list]
    runs = parallel_map(_run_truncated, items, jobs)
    base = runs[0]
    rows = []
    for e, run in zip(eps_list, runs[1:]):
        init = _hs_bundle(grid, run.hats[0] - base.hats[0], s)
        dist = trajectory_distance(run, base, s)
        rows.append({"eps": e, "initial_distance": init, "sup_distance": dist,
                     "amplification": dist / init if init > 0 else 0.0})
    dists = [r["sup_distance"] for r in rows]
    out = {"rows": rows, "monotone": all(b <= a for a, b in zip(dists, dists[1:]))}
    pos = [(r["eps"], r["sup_distance"]) for r in rows if r["eps"] > 0 and r["sup_distance"] > 0]
    out["exponent"] = loglog_fit(*zip(*pos)).slope if len(pos) >= 2 else None
    return out


def bona_smith_ladder(spec: DataSpec, Js, s: float, p: SystemParams, cfg: SolverConfig,
                      grid: Grid, jobs: int = 1) -> dict:
    """Solutions from P_{<=J} u_0 for increasing dyadic J and their consecutive H^s distances."""
    Js = sorted(int(J) for J in Js)
    data = truncate_state(make_data(grid, spec), p.K)
    ladder = [data.map(lambda f, J=J: project_low(f, J)) for J in Js]
    runs = parallel_map(_run_truncated, [(u, p, cfg, p.K) for u in ladder], jobs)
    steps = [trajectory_distance(b, a, s) for a, b in zip(runs, runs[1:])]
    tail = [sum(steps[k:]) for k in range(len(steps))]
    # ratio test on the measured range: consecutive steps shrink by a fixed factor
    ratios = [b / a if a > 0 else (0.0 if b == 0 else math.inf) for a, b in zip(steps, steps[1:])]
    summable = bool(steps) and all(np.isfinite(steps)) and all(r < 1 for r in ratios)
    return {"J": Js, "distances": steps, "tail_sums": tail, "ratios": ratios, "summable": summable}
