"""The one-dimensional modulation dichotomy for alpha = gamma.

With beta = gamma (b + 1) and xi_1 = xi_2 + xi_3, either the transversality
|beta xi_2 - gamma xi_3| or the resonance function is bounded below by a
multiple of |xi_2|, resp. |xi_2|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .system import ParameterError, SystemParams, _close


def _b_of(p: SystemParams) -> float:
    if not _close(p.alpha, p.gamma):
        raise ParameterError("the dichotomy needs alpha = gamma")
    if _close(p.beta, -p.gamma):
        raise ParameterError("the dichotomy needs beta + gamma != 0")
    return p.beta / p.gamma - 1.0


@dataclass(frozen=True)
class DichotomyResult:
    e: float                 # xi_3 / xi_2 - b / 2
    in_A: bool
    in_B: bool
    transversality: float    # |beta xi_2 - gamma xi_3|
    bound_A: float           # |gamma| |b+2| |xi_2| / 4
    resonance: float         # |alpha xi_1^2 - beta xi_2^2 - gamma xi_3^2|
    bound_B: float           # |gamma| |b+2| |xi_2|^2 / 2

    @property
    def A_holds(self) -> bool:
        return self.transversality >= self.bound_A

    @property
    def B_holds(self) -> bool:
        return self.resonance >= self.bound_B

    @property
    def margin_A(self) -> float:
        return self.transversality - self.bound_A

    @property
    def margin_B(self) -> float:
        return self.resonance - self.bound_B

    @property
    def certified(self) -> tuple[str, ...]:
        """Branches whose hypothesis and conclusion both hold (both on the boundary)."""
        out = []
        if self.in_A and self.A_holds:
            out.append("A")
        if self.in_B and self.B_holds:
            out.append("B")
        return tuple(out)


def dichotomy_check(xi2: float, xi3: float, p: SystemParams) -> DichotomyResult:
    if xi2 == 0:
        raise ValueError("xi_2 = 0 is outside the domain of the dichotomy")
    b = _b_of(p)
    e = xi3 / xi2 - b / 2
    edge = abs(b + 2) / 4
    xi1 = xi2 + xi3
    res = abs(math.fsum([p.alpha * xi1 * xi1, -p.beta * xi2 * xi2, -p.gamma * xi3 * xi3]))
    return DichotomyResult(
        e=e,
        in_A=abs(e) <= edge,
        in_B=abs(e) >= edge,
        transversality=abs(math.fsum([p.beta * xi2, -p.gamma * xi3])),
        bound_A=abs(p.gamma) * abs(b + 2) * abs(xi2) / 4,
        resonance=res,
        bound_B=abs(p.gamma) * abs(b + 2) * xi2 * xi2 / 2,
    )


@dataclass(frozen=True)
class ResonanceIdentity:
    lhs: float
    rhs: float
    residual: float


def resonance_identity(tau, xi, p: SystemParams, tol: float = 1e-9) -> ResonanceIdentity:
    """|(tau_1 + alpha xi_1^2) - (tau_2 + beta xi_2^2) - (tau_3 + gamma xi_3^2)|
    against 2 |gamma| xi_2^2 |xi_3 / xi_2 - b / 2|."""
    t1, t2, t3 = map(float, tau)
    x1, x2, x3 = map(float, xi)
    scale_t = max(1.0, abs(t1), abs(t2), abs(t3))
    scale_x = max(1.0, abs(x1), abs(x2), abs(x3))
    if abs(t1 - t2 - t3) > tol * scale_t:
        raise ValueError("constraint tau_1 - tau_2 - tau_3 = 0 violated")
    if abs(x1 - x2 - x3) > tol * scale_x:
        raise ValueError("constraint xi_1 - xi_2 - xi_3 = 0 violated")
    if x2 == 0:
        raise ValueError("xi_2 = 0 is outside the domain of the identity")
    b = _b_of(p)
    lhs = abs(math.fsum([t1, p.alpha * x1 * x1, -t2, -p.beta * x2 * x2, -t3, -p.gamma * x3 * x3]))
    rhs = 2 * abs(p.gamma) * x2 * x2 * abs(x3 / x2 - b / 2)
    return ResonanceIdentity(lhs, rhs, abs(lhs - rhs))
