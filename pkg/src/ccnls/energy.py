"""Correction term, modified energies and the energy-derivative identity.

Notation used below, with D = div Lap^{-1} P_N acting on vectors:

    M_N(f, g, h) = Re int (f . conj(P_N g)) conj(D h) dx

For a solution of the truncated system the shell energy

    1/2 (|P_N u|^2 + |P_N v|^2 + |P_N w|^2) + 2/(beta+gamma) M_N(u, v, w)

has a derivative made only of commutator terms (R1, R2, R3) plus the
remainders of dM_N/dt (R5, R6, R7); see ``identity_terms``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import Field, Grid, StateBundle
from .multipliers import check_dyadic, psi_N, sharp_mask
from .norms import sobolev_norm
from .system import (
    ParameterError,
    SystemParams,
    commutator_pn,
    divergence,
    double_commutator,
)


@dataclass(frozen=True)
class EnergyConfig:
    s: float
    s_tilde: float | None = None
    C_tilde: float = 1.0
    d: int = 1

    def __post_init__(self):
        st = self.s if self.s_tilde is None else self.s_tilde
        object.__setattr__(self, "s_tilde", float(st))
        if st < self.s:
            raise ValueError("s_tilde must be >= s")
        if not self.C_tilde > 0:
            raise ValueError("C_tilde must be positive")

    @property
    def s0(self) -> float:
        return self.d / 2 + (self.s - (self.d + 1) / 2) / 2

    def with_C(self, C: float) -> "EnergyConfig":
        return EnergyConfig(self.s, self.s_tilde, C, self.d)


def _coupling(p: SystemParams) -> float:
    if math.isclose(p.beta, -p.gamma, rel_tol=1e-12, abs_tol=1e-14):
        raise ParameterError("beta + gamma = 0: the correction term is undefined")
    return 4.0 / (p.beta + p.gamma)


def _integral(grid: Grid, a: np.ndarray) -> complex:
    return complex(np.sum(a) * grid.weight)


def _pn_hat(f: Field, N: int) -> np.ndarray:
    return f.hat * psi_N(f.grid.xi_abs, N)


def _D_hat(h: Field, N: int) -> np.ndarray:
    """Spectral div Lap^{-1} P_N h, shape (1, ...)."""
    g = h.grid
    xi2 = np.where(g.xi2 > 0, g.xi2, 1.0)
    ph = _pn_hat(h, N)
    return sum(1j * g.xi[j] * (-1.0 / xi2) * ph[j] for j in range(g.d))[None]


def correction_M_N(f: Field, g: Field, h: Field, N: int, return_imag: bool = False):
    """M_N(f, g, h) = Re int (f . conj(P_N g)) conj(div Lap^{-1} P_N h) dx.

    With ``return_imag`` also return the imaginary part of the integral
    before taking the real part.
    """
    N = check_dyadic(N)
    if N == 1:
        raise ValueError("M_N is undefined for N = 1 (inverse Laplacian at the origin shell)")
    grid = f.grid
    if g.grid != grid or h.grid != grid:
        raise ValueError("grid mismatch")
    pg = grid.ifft(_pn_hat(g, N))
    Dh = grid.ifft(_D_hat(h, N))[0]
    val = _integral(grid, np.sum(f.values * np.conj(pg), axis=0) * np.conj(Dh))
    return (val.real, val.imag) if return_imag else val.real


def shell_mass(state: StateBundle, N: int) -> float:
    """||P_N (u, v, w)||^2 in L^2, summed over the three fields."""
    g = state.grid
    p = psi_N(g.xi_abs, N)
    return float(sum(np.sum(np.abs(f.hat * p) ** 2) for f in state.fields)) * g.weight / g.M**g.d


def modified_energy(state: StateBundle, N: int, cfg: EnergyConfig, p: SystemParams) -> float:
    """E_N = N^{2s~}(1 + N^{-1} C~ |U|_{H^{s0}}^2)|P_N U|^2 + 4/(beta+gamma) N^{2s~} M_N(u, v, w).

    For N = 1 the plain shell mass is returned (no correction term exists).
    """
    N = check_dyadic(N)
    c = _coupling(p)
    if N == 1:
        return shell_mass(state, 1)
    hs0 = sobolev_norm(state, cfg.s0) ** 2
    w = float(N) ** (2 * cfg.s_tilde)
    m = correction_M_N(state.u, state.v, state.w, N)
    return w * (1 + cfg.C_tilde * hs0 / N) * shell_mass(state, N) + c * w * m


def difference_energy(s1: StateBundle, s2: StateBundle, N: int, r: float, cfg: EnergyConfig,
                      p: SystemParams) -> float:
    """Difference energy for U~ = s1 - s2 at weight N^{2r}."""
    N = check_dyadic(N)
    if N == 1:
        raise ValueError("difference energy needs N >= 2")
    c = _coupling(p)
    dd = s1 - s2
    hs = sobolev_norm(s1, cfg.s0) ** 2 + sobolev_norm(s2, cfg.s0) ** 2
    w = float(N) ** (2 * r)
    m = correction_M_N(dd.u, dd.v, dd.w, N) - correction_M_N(s1.u, dd.v, dd.w, N)
    return w * (1 + cfg.C_tilde * hs / N) * shell_mass(dd, N) - c * w * m


# --- coercivity ---------------------------------------------------------------

@dataclass
class CoercivityResult:
    C_tilde: float
    exponent: int | None
    empirical_constant: float
    worst: dict = field(default_factory=dict)
    failed: bool = False


K_GRID = tuple(range(-10, 31))


def _coercivity_terms(ensemble, Ns, cfg, p, mode: str, r: float):
    """Per (member, N): (a, m, h) with E = w[(1 + C h/N) a + c m]."""
    c = _coupling(p)
    rows = []
    for i, member in enumerate(ensemble):
        if mode == "difference":
            s1, s2 = member
            dd = s1 - s2
            h = sobolev_norm(s1, cfg.s0) ** 2 + sobolev_norm(s2, cfg.s0) ** 2
            for N in Ns:
                a = shell_mass(dd, N)
                m = -(correction_M_N(dd.u, dd.v, dd.w, N) - correction_M_N(s1.u, dd.v, dd.w, N))
                rows.append((i, N, a, m, h, sobolev_norm(s2, cfg.s0)))
        else:
            h = sobolev_norm(member, cfg.s0) ** 2
            for N in Ns:
                a = shell_mass(member, N)
                m = correction_M_N(member.u, member.v, member.w, N)
                rows.append((i, N, a, m, h, math.sqrt(h)))
    return c, rows


def coercivity_search(ensemble, cfg: EnergyConfig, p: SystemParams, Ns=(2, 4, 8, 16, 32, 64),
                      mode: str = "energy", r: float | None = None) -> CoercivityResult:
    """Smallest C~ = 2^k (k >= -10) making the energy at least half its coercive part.

    ``mode='difference'`` takes an ensemble of (s1, s2) pairs and tests the
    difference energy instead. The empirical constant is
    sup |M_N| N / (|f|_{H^{s0}} |P_N U|^2), with f = U (or u_2 for pairs).
    """
    ensemble = list(ensemble)
    if not ensemble:
        raise ValueError("empty ensemble")
    c, rows = _coercivity_terms(ensemble, Ns, cfg, p, mode, r or 0.0)
    emp = 0.0
    for (_, N, a, m, _, nrm) in rows:
        if a > 0 and nrm > 0:
            emp = max(emp, abs(m) * N / (nrm * a))
    arr = np.array([(N, a, m, h) for (_, N, a, m, h, _) in rows])
    N_, a_, m_, h_ = arr.T if arr.size else (np.zeros(0),) * 4
    tol = 1e-13 * np.maximum(a_, 1e-300)
    for k in K_GRID:
        C = 2.0**k
        lhs = (1 + C * h_ / N_) * a_ + c * m_
        if np.all(lhs - 0.5 * a_ >= -tol):
            return CoercivityResult(C, k, emp)
    worst = int(np.argmin((1 + 2.0**K_GRID[-1] * h_ / N_) * a_ + c * m_ - 0.5 * a_))
    i, N = rows[worst][0], rows[worst][1]
    return CoercivityResult(math.inf, None, emp, {"member": i, "N": N}, failed=True)


# --- energy-derivative identity -------------------------------------------------

def _im_int(grid, a) -> float:
    return _integral(grid, a).imag


def identity_terms(state: StateBundle, N: int, p: SystemParams, alpha_in_R5: float | None = None,
                   nonlinear: bool = True) -> dict[str, float]:
    """Right-hand-side pieces of the shell-energy identity at one state.

    Returns R1, R2, R3 (commutators), A (the exchange integral
    Im int (u . conj P_N v) conj(div P_N w)), R5, R6, R7 and the pure
    Laplacian pair integral ``lap`` = Im int (Lap u . conj P_N v) conj(D w).
    ``alpha_in_R5`` replaces alpha in the Laplacian term of R5 (negative
    control). With ``nonlinear=False`` the nonlinear pieces are zero.
    """
    g = state.grid
    u, v, w = state.fields
    K = p.K
    mask = sharp_mask(g, K)

    def J(a):
        return g.ifft(g.fft(a) * mask)

    pn = psi_N(g.xi_abs, N)
    Pu = g.ifft(u.hat * pn)
    Pv = g.ifft(v.hat * pn)
    Dw = g.ifft(_D_hat(w, N))[0]
    divPw = g.ifft(sum(1j * g.xi[j] * w.hat[j] * pn for j in range(g.d)))
    uu, vv = u.values, v.values
    lap_u = g.ifft(-g.xi2 * u.hat)
    ucPv = np.sum(uu * np.conj(Pv), axis=0)

    A = _im_int(g, ucPv * np.conj(divPw))
    lap = _im_int(g, np.sum(lap_u * np.conj(Pv), axis=0) * np.conj(Dw))
    grad = sum(_im_int(g, np.sum(g.ifft(1j * g.xi[k] * u.hat) * np.conj(Pv), axis=0)
                       * np.conj(g.ifft(1j * g.xi[k] * _D_hat(w, N))[0])) for k in range(g.d))
    a5 = p.alpha if alpha_in_R5 is None else alpha_in_R5
    out = {"A": A, "lap": lap, "grad": grad}
    if nonlinear:
        divw_f = divergence(w)
        divw = divw_f.values
        R1 = -_im_int(g, np.sum(commutator_pn(v, divw_f, N).values * np.conj(Pu), axis=0))
        R2 = -_im_int(g, np.sum(commutator_pn(u, divw_f.conj(), N).values * np.conj(Pv), axis=0))
        R3 = -_im_int(g, double_commutator(u, v.conj(), N).values[0] * np.conj(divPw))
        n5 = _im_int(g, np.sum(J(divw * vv) * np.conj(Pv), axis=0) * np.conj(Dw))
        R6 = -_im_int(g, ucPv * np.conj(g.ifft(g.fft(np.sum(uu * np.conj(vv), axis=0)) * mask * pn)))
        inner = g.ifft(g.fft(np.conj(divw) * uu) * mask * pn)
        n7 = _im_int(g, np.sum(uu * np.conj(inner), axis=0) * np.conj(Dw))
    else:
        R1 = R2 = R3 = n5 = R6 = n7 = 0.0
    out.update({
        "R1": R1, "R2": R2, "R3": R3,
        "R5": -a5 * lap - n5,
        "R6": R6,
        "R7": p.beta * lap + 2 * p.beta * grad + n7,
    })
    return out


def identity_rhs(terms: dict, p: SystemParams, nonlinear: bool = True) -> float:
    """d/dt of 1/2 (shell mass + 4/(beta+gamma) M_N) assembled from the pieces."""
    bg = p.beta + p.gamma
    dM = bg * terms["A"] + terms["R5"] + terms["R6"] + terms["R7"]
    half_mass = terms["R1"] + terms["R2"] + terms["R3"] - 2 * terms["A"] if nonlinear else 0.0
    return half_mass + (2.0 / bg) * dM


def shell_energy(state: StateBundle, N: int, p: SystemParams) -> float:
    """1/2 (||P_N U||^2 + 4/(beta+gamma) M_N(u, v, w))."""
    c = _coupling(p)
    return 0.5 * (shell_mass(state, N) + c * correction_M_N(state.u, state.v, state.w, N))


@dataclass
class IdentityResidual:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray
    scale: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0


def energy_identity_residual(traj, N: int, cfg: EnergyConfig | None, p: SystemParams,
                             variant: str = "exact") -> IdentityResidual:
    """Centered-difference derivative of the shell energy against the assembled right side.

    ``variant``: 'exact' uses the identity as derived; 'alpha_as_gamma'
    writes gamma for alpha in the Laplacian term (valid only when
    alpha = gamma); 'alpha_as_gamma_corrected' adds the missing
    (gamma - alpha) Laplacian integral back.
    """
    N = check_dyadic(N)
    if N == 1:
        raise ValueError("the identity needs N >= 2")
    _coupling(p)
    n = len(traj)
    if n < 5:
        raise ValueError(f"need at least 5 snapshots, got {n}")
    times = np.asarray(traj.times)
    h = np.diff(times)
    if not np.allclose(h, h[0], rtol=1e-9):
        raise ValueError("snapshots must be uniform in time")
    nonlinear = getattr(traj.config, "nonlinear", True)
    snaps = [traj.snapshot(k) for k in range(n)]
    E = np.array([shell_energy(s, N, p) for s in snaps])
    lhs = (E[2:] - E[:-2]) / (2 * h[0])
    rhs = []
    for s in snaps[1:-1]:
        if variant == "exact":
            t = identity_terms(s, N, p, nonlinear=nonlinear)
            val = identity_rhs(t, p, nonlinear)
        elif variant in ("alpha_as_gamma", "alpha_as_gamma_corrected"):
            t = identity_terms(s, N, p, alpha_in_R5=p.gamma, nonlinear=nonlinear)
            if variant.endswith("corrected"):
                t["R5"] += (p.gamma - p.alpha) * t["lap"]
            val = identity_rhs(t, p, nonlinear)
        else:
            raise ValueError(f"unknown variant {variant!r}")
        rhs.append(val)
    rhs = np.array(rhs)
    scale = float(np.max(np.abs(E))) if E.size else 0.0
    return IdentityResidual(times[1:-1], lhs, rhs, np.abs(lhs - rhs), scale)
