"""Sobolev, dyadic energy and short-time modulation norms on sampled data.

The window-sup functionals below are proxies: they evaluate the defining
expressions on the given sample and never take an infimum over extensions.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .fields import SpaceTimeSample, StateBundle
from .multipliers import (
    _spacetime_hat,
    check_dyadic,
    dyadic_scales,
    eta,
    merge_level,
    modulation_variable,
    modulation_weight,
    psi_N,
    shell_bounds,
    top_level,
)


class SupportError(ValueError):
    """Raised when a sample carries spectral mass outside the requested shell."""

    def __init__(self, mass: float, N: int):
        super().__init__(f"relative spectral mass {mass:.3e} outside I_{N}")
        self.mass = mass
        self.N = N


def _l2sq_hat(grid, hat: np.ndarray) -> float:
    return float(np.sum(np.abs(hat) ** 2)) * grid.weight / grid.M**grid.d


def sobolev_norm(f, s: float) -> float:
    """H^s norm with <xi>^{2s} weights; s = 0 is the physical L^2 quadrature.

    A StateBundle is measured with the sum-of-squares convention.
    """
    if isinstance(f, StateBundle):
        return float(np.sqrt(sum(sobolev_norm(g, s) ** 2 for g in f.fields)))
    w = (1.0 + f.grid.xi2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.hat) ** 2) * f.grid.weight / f.grid.M**f.grid.d))


def homogeneous_norm(f, s: float) -> float:
    """Homogeneous |xi|^s seminorm (the zero mode is dropped when s < 0)."""
    if isinstance(f, StateBundle):
        return float(np.sqrt(sum(homogeneous_norm(g, s) ** 2 for g in f.fields)))
    xi = f.grid.xi_abs
    w = np.zeros_like(xi)
    nz = xi > 0
    w[nz] = xi[nz] ** (2 * s)
    if s == 0:
        w[~nz] = 1.0
    return float(np.sqrt(np.sum(w * np.abs(f.hat) ** 2) * f.grid.weight / f.grid.M**f.grid.d))


def l2_norm(f) -> float:
    return sobolev_norm(f, 0.0)


def dyadic_mass(f, N: int) -> float:
    """||P_N f||_{L^2}^2, summed over components (and fields for a bundle)."""
    if isinstance(f, StateBundle):
        return sum(dyadic_mass(g, N) for g in f.fields)
    return _l2sq_hat(f.grid, f.hat * psi_N(f.grid.xi_abs, N))


def dyadic_energy_norm(traj: Sequence, s: float, scales: Iterable[int] | None = None) -> float:
    """E^s norm: l^2 over N of N^s sup_t ||P_N f(t)||, per component, squares summed."""
    traj = list(traj)
    if not traj:
        raise ValueError("empty trajectory")
    first = traj[0]
    grid = first.grid
    scales = dyadic_scales(grid) if scales is None else list(scales)

    def comps(x):
        if isinstance(x, StateBundle):
            return np.concatenate([g.hat for g in x.fields])
        return x.hat

    hats = np.stack([comps(x) for x in traj])  # (T, C, ...)
    total = 0.0
    for N in scales:
        p = psi_N(grid.xi_abs, N)
        axes = tuple(range(2, hats.ndim))
        masses = np.sum(np.abs(hats * p) ** 2, axis=axes) * grid.weight / grid.M**grid.d
        total += float(N) ** (2 * s) * float(np.sum(np.max(masses, axis=0)))
    return float(np.sqrt(total))


# --- space-time norms --------------------------------------------------------

def shell_support_violation(F: SpaceTimeSample, N: int) -> float:
    """Relative spectral mass of F outside R x I_N."""
    lo, hi = shell_bounds(N)
    xi = F.grid.xi_abs
    outside = (xi < lo * (1 - 1e-12)) | (xi > hi * (1 + 1e-12))
    hat = np.fft.fftn(F.values, axes=F.grid.spatial_axes)
    tot = float(np.sum(np.abs(hat) ** 2))
    if tot == 0:
        return 0.0
    return float(np.sum(np.abs(hat[..., outside]) ** 2)) / tot


def _xns_from_hat(F: SpaceTimeSample, hat: np.ndarray, sigma: float) -> float:
    grid = F.grid
    m = modulation_variable(F, sigma)
    j0 = merge_level(F)
    J = max(j0, top_level(m))
    scale = F.dt * grid.weight / (F.Q * grid.M**grid.d)
    total = 0.0
    for j in [0] + list(range(j0 + 1, J + 1)):
        w = modulation_weight(m, j, j0)
        total += 2.0 ** (j / 2) * np.sqrt(np.sum(np.abs(w * hat) ** 2) * scale)
    return float(total)


def xns_norm(F: SpaceTimeSample, N: int, sigma: float, tol: float = 1e-8) -> float:
    """X_{N,sigma}: sum over modulation shells j of 2^{j/2} ||eta_j(tau + sigma|xi|^2) F||.

    The L^2 over (tau, xi) is normalized by Plancherel to match the
    space-time quadrature dt (L/M)^d.
    """
    N = check_dyadic(N)
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    bad = shell_support_violation(F, N)
    if bad > tol:
        raise SupportError(bad, N)
    return _xns_from_hat(F, _spacetime_hat(F), sigma)


def window_centers(F: SpaceTimeSample, N: int, T: float) -> np.ndarray:
    """Centers spaced T/(4N) whose window support fits inside the sample."""
    if not 0 < T <= 1:
        raise ValueError(f"T must lie in (0, 1], got {T}")
    half = (5.0 / 3.0) * T / N
    t = F.times
    lo, hi = t[0] + half, t[-1] - half
    if hi < lo:
        return np.empty(0)
    step = T / (4.0 * N)
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _windowed(F: SpaceTimeSample, N: int, T: float, tc: float) -> SpaceTimeSample:
    w = eta(N / T * (F.times - tc))
    shape = (F.Q,) + (1,) * (F.values.ndim - 1)
    return F.with_values(F.values * w.reshape(shape), window={"center": float(tc), "width": T / N})


def _proxy(F, N, sigma, T, resolvent: bool, tol: float) -> float:
    N = check_dyadic(N)
    centers = window_centers(F, N, T)
    if centers.size == 0:
        raise ValueError(f"no window of width ~T/N = {T / N:.3g} fits in the sample span")
    bad = shell_support_violation(F, N)
    if bad > tol:
        raise SupportError(bad, N)
    best = 0.0
    m = modulation_variable(F, sigma) if resolvent else None
    for tc in centers:
        Fw = _windowed(F, N, T, tc)
        hat = _spacetime_hat(Fw)
        if resolvent:
            hat = hat / (m + 1j * N / T)
        best = max(best, _xns_from_hat(Fw, hat, sigma))
    return best


def f_norm_proxy(F: SpaceTimeSample, N: int, sigma: float, T: float, tol: float = 1e-8) -> float:
    """Sup over window centers of the X_{N,sigma} norm of eta_0(N T^{-1}(t - t_N)) F."""
    return _proxy(F, N, sigma, T, False, tol)


def g_norm_proxy(F: SpaceTimeSample, N: int, sigma: float, T: float, tol: float = 1e-8) -> float:
    """As f_norm_proxy with the weight (tau + sigma|xi|^2 + i N/T)^{-1} applied first."""
    return _proxy(F, N, sigma, T, True, tol)
