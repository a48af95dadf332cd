"""Dyadic cutoffs, sharp truncations and modulation projectors."""

from __future__ import annotations

import math

import numpy as np

from .fields import Field, Grid, SpaceTimeSample

ETA_INNER = 4.0 / 3.0
ETA_OUTER = 5.0 / 3.0


def _smoothstep5(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def eta(x):
    """Even C^2 bump: 1 on [-4/3, 4/3], 0 outside [-5/3, 5/3].

    The transition band uses the quintic smoothstep, so the first two
    derivatives vanish at both ends of the ramp.
    """
    ax = np.abs(np.asarray(x, dtype=float))
    out = 1.0 - _smoothstep5((ax - ETA_INNER) / (ETA_OUTER - ETA_INNER))
    return out if out.ndim else float(out)


def eta_j(x, j: int):
    """eta for j = 0, and the annular difference eta(x/2^j) - eta(x/2^(j-1)) otherwise."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    x = np.asarray(x, dtype=float)
    if j == 0:
        return eta(x)
    return eta(x / 2.0**j) - eta(x / 2.0 ** (j - 1))


def check_dyadic(N) -> int:
    n = int(N)
    if n != N or n < 1 or (n & (n - 1)):
        raise ValueError(f"dyadic scale must be a power of two, got {N}")
    return n


def psi_N(xi, N: int):
    """Littlewood-Paley symbol at |xi| (xi may be a magnitude or a vector with last axis d)."""
    N = check_dyadic(N)
    r = np.abs(np.asarray(xi, dtype=float))
    if N == 1:
        return eta(r)
    return eta(r / N) - eta(2.0 * r / N)


def shell_bounds(N: int) -> tuple[float, float]:
    """Closed annulus I_N as (inner, outer) radii."""
    N = check_dyadic(N)
    return (0.0, 2.0) if N == 1 else (N / 2.0, 2.0 * N)


def dyadic_scales(grid: Grid) -> list[int]:
    """All N whose shells meet the lattice; their symbols sum to one on it."""
    scales = [1]
    while ETA_INNER * scales[-1] < grid.xi_max:
        scales.append(2 * scales[-1])
    return scales


def sharp_mask(grid: Grid, K) -> np.ndarray:
    """Indicator of the closed ball |xi| <= K on the lattice."""
    if K is None or np.isinf(K):
        return np.ones(grid.shape, dtype=bool)
    if not K > 0:
        raise ValueError(f"truncation K must be positive, got {K}")
    return grid.xi_abs <= K * (1 + 1e-12)


def project_dyadic(f: Field, N: int) -> Field:
    """P_N as a spectral multiplier; output is spectral."""
    return Field(f.grid, f.hat * psi_N(f.grid.xi_abs, N), spectral=True)


def project_low(f: Field, N: int) -> Field:
    """P_{<=N}, the sum of P_M over M <= N."""
    check_dyadic(N)
    return Field(f.grid, f.hat * eta(f.grid.xi_abs / N), spectral=True)


def sharp_truncate(f: Field, K=math.inf) -> Field:
    """J_{<=K}: keep the lattice modes with |xi| <= K."""
    if K is None or np.isinf(K):
        return f.to_spectral()
    return Field(f.grid, f.hat * sharp_mask(f.grid, K), spectral=True)


def band_truncate(f: Field, K1, K2) -> Field:
    """J_{(K1, K2]} = J_{<=K2} - J_{<=K1}."""
    m = sharp_mask(f.grid, K2) & ~sharp_mask(f.grid, K1)
    return Field(f.grid, f.hat * m, spectral=True)


# --- modulation projectors ---------------------------------------------------

def _spacetime_hat(F: SpaceTimeSample) -> np.ndarray:
    return np.fft.fftn(F.values, axes=(0,) + F.grid.spatial_axes)


def _spacetime_ihat(F: SpaceTimeSample, a: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(a, axes=(0,) + F.grid.spatial_axes)


def modulation_variable(F: SpaceTimeSample, sigma: float) -> np.ndarray:
    """tau + sigma |xi|^2 on the (tau, xi) lattice, shaped for broadcasting."""
    tau = F.tau.reshape((F.Q, 1) + (1,) * F.grid.d)
    return tau + sigma * F.grid.xi2[None, None]


def merge_level(F: SpaceTimeSample) -> int:
    """Finest modulation shell resolved by the time window.

    Shells whose plateau is narrower than one tau-lattice step are folded
    into shell 0.
    """
    dtau = 2 * np.pi / (F.Q * F.dt)
    j = 0
    while ETA_INNER * 2.0**j < dtau:
        j += 1
    return j


def top_level(m: np.ndarray) -> int:
    """Smallest J such that eta(m / 2^J) = 1 on the whole lattice."""
    top = float(np.max(np.abs(m))) if m.size else 0.0
    j = 0
    while ETA_INNER * 2.0**j < top:
        j += 1
    return j


def modulation_weight(m: np.ndarray, j: int, j0: int) -> np.ndarray:
    """Shell-j symbol after merging shells <= j0 into shell 0."""
    if j == 0:
        return eta(m / 2.0**j0)
    if j <= j0:
        return np.zeros_like(m)
    return eta_j(m, j)


def modulation_project(F: SpaceTimeSample, j: int, sigma: float) -> SpaceTimeSample:
    """Q_j^sigma: multiply the (tau, xi) transform by eta_j(tau + sigma|xi|^2)."""
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    if j < 0:
        raise ValueError("j must be nonnegative")
    if F.Q < 4:
        raise ValueError(f"modulation projection needs at least 4 time samples, got {F.Q}")
    m = modulation_variable(F, sigma)
    w = modulation_weight(m, j, merge_level(F))
    return F.with_values(_spacetime_ihat(F, _spacetime_hat(F) * w))


def modulation_levels(F: SpaceTimeSample, sigma: float) -> list[int]:
    """Shell indices that can be nonzero on this sample (0 and j0+1 ... J)."""
    m = modulation_variable(F, sigma)
    j0 = merge_level(F)
    return [0] + list(range(j0 + 1, max(j0, top_level(m)) + 1))
