"""Coefficients, regime classification and the truncated quadratic nonlinearity.

The system for C^d-valued u, v, w (with F.G = sum_j F_j G_j, no conjugation):

    (i d_t + alpha Lap) u = -(div w) v
    (i d_t + beta  Lap) v = -(div conj(w)) u
    (i d_t + gamma Lap) w = grad(u . conj(v))
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .fields import Field, Grid, StateBundle
from .multipliers import psi_N, sharp_mask


class ParameterError(ValueError):
    """Invalid coefficients or a regime mismatch."""


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-14)


@dataclass(frozen=True)
class SystemParams:
    alpha: float
    beta: float
    gamma: float
    K: float = math.inf
    d: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) == 0:
                raise ParameterError(f"{name} must be nonzero")
        if self.d not in (1, 2):
            raise ParameterError(f"d must be 1 or 2, got {self.d}")
        K = math.inf if self.K is None else float(self.K)
        if not K > 0:
            raise ParameterError(f"K must be positive, got {self.K}")
        object.__setattr__(self, "K", K)

    @property
    def sigmas(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    def to_json(self) -> dict:
        out = asdict(self)
        out["K"] = None if math.isinf(self.K) else self.K
        return out

    @classmethod
    def from_json(cls, d: dict) -> "SystemParams":
        return cls(d["alpha"], d["beta"], d["gamma"], math.inf if d.get("K") is None else d["K"], d.get("d", 1))


class Regime(str, Enum):
    Iteration = "Iteration"
    ShortTime = "ShortTime"
    IllPosedLine = "IllPosedLine"
    Degenerate = "Degenerate"


@dataclass(frozen=True)
class ResonanceReport:
    kappa_tilde: float
    kappa: float
    mu: float
    b: float | None
    regime: Regime
    flagged: bool = False

    def to_json(self) -> dict:
        out = asdict(self)
        out["regime"] = self.regime.value
        return out


def resonance_quantities(p: SystemParams) -> ResonanceReport:
    a, b_, g = p.alpha, p.beta, p.gamma
    kt = (a - g) * (b_ + g)
    kappa = (a - b_) * (a - g) * (b_ + g)
    mu = a * b_ * g * (1 / a - 1 / b_ - 1 / g)
    b = b_ / g - 1.0
    a_eq_g = _close(a, g)
    line = _close(b_, -g)
    if line:
        regime, flagged = Regime.IllPosedLine, a_eq_g
    elif a_eq_g:
        regime, flagged = Regime.ShortTime, False
    else:
        regime, flagged = Regime.Iteration, False
    return ResonanceReport(kt, kappa, mu, b, regime, flagged)


# --- products and the nonlinearity ---------------------------------------------

def _check_grid(*fields: Field):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError(f"grid mismatch: {g} vs {f.grid}")


def divergence_hat(grid: Grid, wh: np.ndarray) -> np.ndarray:
    """Spectral divergence of a (d, ...) spectral array, returned with shape (1, ...)."""
    return sum(1j * grid.xi[j] * wh[j] for j in range(grid.d))[None]


def gradient_hat(grid: Grid, sh: np.ndarray) -> np.ndarray:
    """Spectral gradient of a (1, ...) spectral scalar, returned with shape (d, ...)."""
    return np.stack([1j * grid.xi[j] * sh[0] for j in range(grid.d)])


def nonlinear_hat(grid: Grid, uh: np.ndarray, vh: np.ndarray, wh: np.ndarray, K=math.inf,
                  dealias: bool = True):
    """Spectral N_K(u, v, w) for spectral inputs of shape (d, M, ..., M).

    Inner truncations are applied to the inputs, the outer one to the
    products. With ``dealias`` the 2/3 rule is folded into both masks.
    """
    mask = sharp_mask(grid, K)
    if dealias:
        mask = mask & (grid.xi_abs <= grid.dealias_cutoff * (1 + 1e-12))
    uh, vh, wh = uh * mask, vh * mask, wh * mask
    divw = grid.ifft(divergence_hat(grid, wh))
    u, v = grid.ifft(uh), grid.ifft(vh)
    n1 = grid.fft(divw * v) * mask
    n2 = grid.fft(np.conj(divw) * u) * mask
    s = grid.fft(np.sum(u * np.conj(v), axis=0, keepdims=True)) * mask
    n3 = gradient_hat(grid, s)
    return n1, n2, n3


def nonlinearity(state: StateBundle, p: SystemParams, dealias: bool = True) -> tuple[Field, Field, Field]:
    """N_K(u, v, w) = (J((div w) v), J((div conj w) u), grad J(u . conj v)).

    Every input is truncated by J_{<=K} first, matching the truncated system.
    """
    g = state.grid
    n = nonlinear_hat(g, state.u.hat, state.v.hat, state.w.hat, p.K, dealias)
    return tuple(Field(g, a, spectral=True) for a in n)


def pointwise_dot(f: Field, g: Field) -> Field:
    """F.G summed over components when both are vectors, broadcast if one is scalar."""
    _check_grid(f, g)
    a, b = f.values, g.values
    if a.shape[0] == b.shape[0] and a.shape[0] > 1:
        return Field(f.grid, np.sum(a * b, axis=0, keepdims=True))
    return Field(f.grid, a * b)


def pointwise_product(f: Field, g: Field) -> Field:
    """Componentwise product, with a one-component field broadcast."""
    _check_grid(f, g)
    return Field(f.grid, f.values * g.values)


def divergence(f: Field) -> Field:
    return Field(f.grid, divergence_hat(f.grid, f.hat), spectral=True)


def _pn(f: Field, N: int) -> Field:
    return Field(f.grid, f.hat * psi_N(f.grid.xi_abs, N), spectral=True)


def commutator_pn(f: Field, g: Field, N: int) -> Field:
    """[P_N, f] g = P_N(f g) - f P_N g, componentwise (a scalar factor broadcasts)."""
    _check_grid(f, g)
    fg = pointwise_product(f, g)
    return Field(f.grid, _pn(fg, N).values - pointwise_product(f, _pn(g, N)).values)


def double_commutator(f: Field, g: Field, N: int) -> Field:
    """com(P_N, f, g) = P_N(f.g) - (P_N f).g - f.(P_N g), contracted to a scalar."""
    _check_grid(f, g)
    a = _pn(pointwise_dot(f, g), N).values
    b = pointwise_dot(_pn(f, N), g).values
    c = pointwise_dot(f, _pn(g, N)).values
    # grouping b + c keeps the result exactly symmetric in f and g
    return Field(f.grid, a - (b + c))


def scaling_transform(state: StateBundle, lam: float) -> StateBundle:
    """u^lam(t, x) = lam^{-1} u(lam^{-2} t, lam^{-1} x).

    The rescaled field lives on the torus of period lam*L with the same M,
    so grid values carry over exactly; lam must be a power of two.
    """
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    e = math.log2(lam)
    if abs(e - round(e)) > 1e-12:
        raise ParameterError(f"lambda = {lam} is not a power of two")
    g = state.grid
    g2 = Grid(g.d, g.L * lam, g.M)
    return StateBundle(*(Field(g2, f.values / lam) for f in state.fields), time=state.time * lam**2)
