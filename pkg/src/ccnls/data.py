"""Reproducible initial data for simulations and ensembles."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .fields import Field, Grid, StateBundle

KINDS = ("SobolevRandom", "Gaussian", "SingleMode", "BoxData")
DEFAULT_WEIGHTS = (1.0, 0.8, 0.6)


@dataclass(frozen=True)
class DataSpec:
    """Recipe for a StateBundle; identical specs give bit-identical data.

    ``weights`` scales (u, v, w) so that |v| != |w| and Q2 is not degenerate.
    ``extra`` holds kind-specific knobs (width, carrier, mode, box corners).
    """

    kind: str = "SobolevRandom"
    s: float = 1.6
    seed: int = 0
    amplitude: float = 1.0
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown data kind {self.kind!r}")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "seed", int(self.seed) % 2**64)

    def to_json(self) -> dict:
        out = asdict(self)
        out["weights"] = list(self.weights)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "DataSpec":
        d = dict(d)
        if "weights" in d:
            d["weights"] = tuple(d["weights"])
        return cls(**d)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def sobolev_profile(grid: Grid, s: float) -> np.ndarray:
    """|c_xi| / A on the lattice, scaled so the H^s norm is a Riemann sum.

    With this scaling the H^s norm approximates
    (int <xi>^{-d} (1 + log<xi>)^{-2} dxi)^{1/2} independently of L and M.
    """
    jb = np.sqrt(1.0 + grid.xi2)
    a = jb ** (-(s + grid.d / 2)) / (1.0 + np.log(jb))
    # raw FFT coefficient of a mode with physical amplitude c is c * M^d
    return a * (2 * np.pi) ** (grid.d / 2) / grid.L**grid.d * grid.M**grid.d


def sobolev_random_data(grid: Grid, spec: DataSpec) -> StateBundle:
    """Random-phase data with amplitudes <xi>^{-(s+d/2)} / (1 + log<xi>)."""
    if spec.s <= 0:
        raise ValueError("s must be positive")
    prof = sobolev_profile(grid, spec.s)
    theta = _rng(spec.seed).uniform(0.0, 2 * np.pi, size=(3, grid.d) + grid.shape)
    hats = spec.amplitude * prof[None, None] * np.exp(1j * theta)
    hats = hats * np.array(spec.weights).reshape((3, 1) + (1,) * grid.d)
    return StateBundle.from_stacked_hat(grid, hats)


def gaussian_data(grid: Grid, spec: DataSpec) -> StateBundle:
    """Modulated Gaussians with distinct centers and carriers per field."""
    width = float(spec.extra.get("width", 2.0))
    shift = float(spec.extra.get("shift", 1.5))
    carriers = spec.extra.get("carriers", (1.0, -1.0, 2.0))
    rng = _rng(spec.seed)
    out = []
    for i in range(3):
        phase = rng.uniform(0, 2 * np.pi, size=grid.d)
        center = (i - 1) * shift

        def fn(*x, i=i, phase=phase, center=center):
            r2 = sum((xj - center) ** 2 for xj in x)
            return [np.exp(-r2 / (2 * width**2)) * np.exp(1j * (carriers[i] * x[j] + phase[j]))
                    for j in range(grid.d)]

        vals = spec.amplitude * spec.weights[i] * np.asarray(fn(*grid.x))
        out.append(Field(grid, vals))
    return StateBundle(*out)


def single_mode_data(grid: Grid, spec: DataSpec) -> StateBundle:
    """One lattice mode per field; indices from extra['modes'] (integer triples)."""
    modes = spec.extra.get("modes", (1, 1, 2))
    fields = []
    for i, k in enumerate(modes):
        kk = k if isinstance(k, (list, tuple)) else (k,) * grid.d
        fields.append(Field.mode(grid, kk, amplitude=spec.amplitude * spec.weights[i]))
    return StateBundle(*fields)


def box_data(grid: Grid, spec: DataSpec) -> StateBundle:
    """Spectral indicator of a box with random phases; extra['box'] = [[lo, hi], ...] per axis."""
    box = spec.extra.get("box", [[1.0, 2.0]] * grid.d)
    m = np.ones(grid.shape, dtype=bool)
    for j, (lo, hi) in enumerate(box):
        m &= (grid.xi[j] >= lo) & (grid.xi[j] <= hi)
    theta = _rng(spec.seed).uniform(0.0, 2 * np.pi, size=(3, grid.d) + grid.shape)
    hats = spec.amplitude * m[None, None] * np.exp(1j * theta) * grid.M**grid.d / grid.L ** (grid.d / 2)
    hats = hats * np.array(spec.weights).reshape((3, 1) + (1,) * grid.d)
    return StateBundle.from_stacked_hat(grid, hats)


def make_data(grid: Grid, spec: DataSpec) -> StateBundle:
    return {
        "SobolevRandom": sobolev_random_data,
        "Gaussian": gaussian_data,
        "SingleMode": single_mode_data,
        "BoxData": box_data,
    }[spec.kind](grid, spec)
