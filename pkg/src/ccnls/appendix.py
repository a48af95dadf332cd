"""Box constructions showing that the window length and the trilinear
exponent cannot be improved.

All quantities are evaluated with the exact box backend: convolutions are
trapezoid products, their integrals are closed form, and the real part of
the time integral is bounded below through the sup of the phase.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .boxes import BoxRegion, box_convolution, box_quadrature
from .fitting import EstimateReport, loglog_fit
from .system import ParameterError, SystemParams, _close

C2_DEFAULT, C3_DEFAULT, C_TILDE_DEFAULT = 64.0, 16.0, 16.0
REGIMES = ("multiD", "b_pos", "b_neg", "b_zero")


def _b(p: SystemParams) -> float:
    if not _close(p.alpha, p.gamma):
        raise ParameterError("the constructions need alpha = gamma")
    if _close(p.beta, -p.gamma):
        raise ParameterError("the constructions need beta + gamma != 0")
    return p.beta / p.gamma - 1.0


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def real_part_lower(t0: float, phase_sup: float) -> float:
    """inf over |phi| <= phase_sup of Re int_0^t0 e^{i t phi} dt; 0 if not certifiable."""
    if phase_sup == 0:
        return t0
    x = t0 * phase_sup
    return math.sin(x) / phase_sup if x <= math.pi else 0.0


@dataclass(frozen=True)
class PhaseBoxes:
    """Two boxes for the free variables and the phase as a function of them."""

    X: BoxRegion
    Y: BoxRegion
    kind: str            # "a1": (xi, eta), "a2": (xi_2, xi_3)
    b: float
    gamma: float

    def phase(self, x, y) -> np.ndarray:
        x, y = np.atleast_2d(x), np.atleast_2d(y)
        if self.kind == "a1":
            # alpha |xi - eta|^2 - beta |eta|^2 - gamma |xi|^2 with alpha = gamma
            return -2 * self.gamma * _dot(y, x + 0.5 * self.b * y)
        # alpha |xi2 + xi3|^2 - beta |xi2|^2 - gamma |xi3|^2 with alpha = gamma
        return 2 * self.gamma * _dot(x, y - 0.5 * self.b * x)


def phase_smallness(boxes: PhaseBoxes, t_max: float, samples: int = 4096, seed: int = 0) -> float:
    """sup |t' Phi| over the box product and t' in [0, t_max] (corners plus random points)."""
    if t_max == 0:
        return 0.0
    cx, cy = boxes.X.corners(), boxes.Y.corners()
    xs = np.repeat(cx, len(cy), axis=0)
    ys = np.tile(cy, (len(cx), 1))
    rng = np.random.default_rng(seed)
    xs = np.concatenate([xs, boxes.X.sample(rng, samples)])
    ys = np.concatenate([ys, boxes.Y.sample(rng, samples)])
    return float(abs(t_max) * np.abs(boxes.phase(xs, ys)).max())


def _dyadic(x: float) -> float:
    return 2.0 ** math.floor(math.log2(x) + 0.5)


def _far(box: BoxRegion) -> float:
    return float(np.linalg.norm(np.maximum(np.abs(box.lo), np.abs(box.hi))))


# --- window scaling (a < 1) -------------------------------------------------------

def a1_boxes(K: float, a: float, d: int = 1):
    delta = 1.5 * (1 - a)
    e = K**-delta
    D1 = BoxRegion((K,) + (0.0,) * (d - 1), (K + 3 * e,) + (1.0,) * (d - 1))
    D2 = BoxRegion((e,) + (0.0,) * (d - 1), (2 * e,) + (0.5,) * (d - 1))
    D = BoxRegion((K - e,) + (0.0,) * (d - 1), (K + e,) + (0.5,) * (d - 1))
    return D1, D2, D, delta


@dataclass(frozen=True)
class A1Result:
    K: float
    a: float
    s: float
    T: float
    delta: float
    ratio: float
    predicted_exponent: float
    conv_min: float
    conv_bound: float
    phase_sup: float
    re_lower: float
    lower_bound: float

    def to_json(self) -> dict:
        return asdict(self)


def _check_a1(a, p):
    if not 0 < a < 1:
        raise ParameterError("a must lie in (0, 1)")
    return _b(p)


def counterexample_a1(K: float, a: float, s: float, T: float, p: SystemParams, d: int = 1,
                      samples: int = 2048) -> A1Result:
    """H^s size of the Duhamel term over [0, T K^{-a}] against ||f|| ||g|| (box data)."""
    b = _check_a1(a, p)
    if not 0 < T <= 1:
        raise ParameterError("T must lie in (0, 1]")
    D1, D2, D, delta = a1_boxes(K, a, d)
    conv = box_convolution(D1, D2.reflect())
    conv_min = conv.min_on(D)
    conv_bound = 2.0 ** -(d - 1) * K**-delta
    t0 = T * K**-a
    ph = phase_smallness(PhaseBoxes(D, D2.reflect(), "a1", b, p.gamma), 1.0, samples)
    re = real_part_lower(t0, ph)
    w = lambda xi: (1 + _dot(xi, xi)) ** s * xi[:, 0] ** 2 * conv(xi) ** 2
    out_norm = math.sqrt(box_quadrature(D, w, conv))
    lb = re * out_norm
    nf = math.sqrt(box_quadrature(D1, lambda xi: (1 + _dot(xi, xi)) ** s))
    ng = math.sqrt(box_quadrature(D2, lambda xi: (1 + _dot(xi, xi)) ** s))
    return A1Result(K, a, s, T, delta, lb / (nf * ng), (1 - a) / 4, conv_min, conv_bound,
                    ph * t0, re, lb)


def a1_phase_sweep(Ks, a: float, T: float, p: SystemParams, d: int = 1):
    """sup |t' Phi| per K with t' <= T K^{-a}, and its log-log fit."""
    b = _check_a1(a, p)
    sups = []
    for K in Ks:
        D1, D2, D, _ = a1_boxes(K, a, d)
        sups.append(phase_smallness(PhaseBoxes(D, D2.reflect(), "a1", b, p.gamma), T * K**-a))
    return sups, loglog_fit(Ks, sups)


def a1_sweep(Ks, a: float, s: float, T: float, p: SystemParams, d: int = 1) -> EstimateReport:
    rep = EstimateReport("counterexample_a1", {"K": list(Ks), "a": a, "s": s, "T": T, "d": d,
                                               "params": p.to_json()})
    rows = []
    for K in Ks:
        r = counterexample_a1(K, a, s, T, p, d)
        rep.add(K, 0, r.ratio)
        rows.append(r.to_json())
        # box edges near K carry an absolute rounding error of a few ulps of K
        if r.conv_min < r.conv_bound * (1 - 1e-12) - 8 * np.finfo(float).eps * K:
            rep.warnings.append(f"convolution bound fails at K={K}")
    rep.flags["points"] = rows
    rep.flags["predicted_exponent"] = (1 - a) / 4
    return rep


# --- trilinear optimality -----------------------------------------------------------

@dataclass(frozen=True)
class A2Boxes:
    D1: BoxRegion
    D2: BoxRegion
    D3: BoxRegion
    C2: float
    C3: float
    adjusted: bool


def a2_boxes(K: float, regime: str, p: SystemParams, d: int = 1, p_exp: float = 3,
             C_tilde: float = C_TILDE_DEFAULT, C2: float = C2_DEFAULT, C3: float = C3_DEFAULT) -> A2Boxes:
    b = _b(p)
    if regime not in REGIMES:
        raise ParameterError(f"regime must be one of {REGIMES}")
    if regime == "multiD":
        if d < 2:
            raise ParameterError("multiD needs d >= 2")
        if p_exp < 2:
            raise ParameterError("p_exp must be at least 2")
        Kt, c, r = K**p_exp, 1.0 / C_tilde, d - 1
        D1 = BoxRegion((Kt + c,) + (1.5 * K,) * r, (Kt + 2 * c,) + (2.0 * K,) * r)
        D2 = BoxRegion((0.0,) + (0.5 * K,) * r, (c,) + (1.0 * K,) * r)
        D3 = BoxRegion((Kt,) + (0.5 * K,) * r, (Kt + 2 * c,) + (1.5 * K,) * r)
        return A2Boxes(D1, D2, D3, C2, C3, False)
    if d != 1:
        raise ParameterError(f"regime {regime} is one-dimensional")
    if regime == "b_zero":
        if not _close(p.beta, p.gamma):
            raise ParameterError("b_zero needs beta = gamma")
        if not C2 > C3:
            raise ParameterError("b_zero needs C2 > C3")
        D1 = BoxRegion((2 * K + 1 / C2,), (2 * K + 1 / C3,))
        D2 = BoxRegion((K,), (K + 1 / C2,))
        D3 = BoxRegion((K,), (K + 1 / C3,))
        return A2Boxes(D1, D2, D3, C2, C3, False)
    if regime == "b_pos" and not b > 0:
        raise ParameterError(f"b_pos needs b > 0, got b = {b}")
    if regime == "b_neg" and not b < 0:
        raise ParameterError(f"b_neg needs b < 0, got b = {b}")
    adjusted = False
    if C3 >= abs(b) * C2 / 2:
        # D_1 would be empty or a point
        C3, adjusted = abs(b) * C2 / 4, True
    top = abs(b) / (2 * C3)
    base = (b / 2 + 1) * K
    D1 = BoxRegion((base + 1 / C2,), (base + top,))
    D2 = BoxRegion((K,), (K + 1 / C2,))
    D3 = BoxRegion((b * K / 2,), (b * K / 2 + top,))
    return A2Boxes(D1, D2, D3, C2, C3, adjusted)


def _exact_1d_integral(bx: A2Boxes, p: SystemParams, b: float, t0: float, n: int = 400) -> float:
    """|int 1_{D1}(x2 + x3) 1_{D2}(x2) 1_{D3}(x3) int_0^t0 e^{i t Phi} dt| by midpoint quadrature."""
    def mid(box):
        h = (box.hi[0] - box.lo[0]) / n
        return box.lo[0] + h * (np.arange(n) + 0.5), h
    x2, h2 = mid(bx.D2)
    x3, h3 = mid(bx.D3)
    X2, X3 = np.meshgrid(x2, x3, indexing="ij")
    phi = 2 * p.gamma * X2 * (X3 - 0.5 * b * X2)
    small = np.abs(t0 * phi) < 1e-10
    kern = np.where(small, t0, (np.exp(1j * t0 * np.where(small, 1.0, phi)) - 1)
                    / (1j * np.where(small, 1.0, phi)))
    ind = (X2 + X3 >= bx.D1.lo[0]) & (X2 + X3 <= bx.D1.hi[0])
    return float(abs(np.sum(kern * ind)) * h2 * h3)


def counterexample_a2(K, p_exp: float = 3, regime: str = "multiD", d: int = 2,
                      p: SystemParams | None = None, s: float = 0.0, T: float = 1.0,
                      C_tilde: float = C_TILDE_DEFAULT, C2: float = C2_DEFAULT,
                      C3: float = C3_DEFAULT, samples: int = 2048) -> EstimateReport:
    """Required constant C(K) = |I| / ((N_1^*)^{-1} (N_3^*)^s prod ||f_i||) for the box data.

    |I| is bounded below by (inf Re of the time integral) * int_{D1} 1_{D2} * 1_{D3}.
    For one-dimensional regimes the integral is also evaluated directly.
    """
    p = p or SystemParams(1.0, 1.0, 1.0, d=d)
    b = _b(p)
    Ks = [K] if np.isscalar(K) else list(K)
    if not 0 < T <= 1:
        raise ParameterError("T must lie in (0, 1]")
    if s >= (d - 1) / 2 and regime != "multiD" and s > 0:
        raise ParameterError("one-dimensional constructions use s <= 0")
    rep = EstimateReport(f"counterexample_a2_{regime}",
                         {"K": Ks, "p_exp": p_exp, "regime": regime, "d": d, "s": s, "T": T,
                          "params": p.to_json(), "C_tilde": C_tilde, "C2": C2, "C3": C3})
    points = []
    for Kv in Ks:
        bx = a2_boxes(Kv, regime, p, d, p_exp, C_tilde, C2, C3)
        Ns = sorted((_dyadic(_far(B)) for B in (bx.D1, bx.D2, bx.D3)), reverse=True)
        t0 = T / Ns[0]
        ph = phase_smallness(PhaseBoxes(bx.D2, bx.D3, "a2", b, p.gamma), t0, samples)
        re = real_part_lower(t0, ph / t0 if t0 else 0.0)
        conv = box_convolution(bx.D2, bx.D3)
        mass = conv.integral_on(bx.D1)
        cmin = conv.min_on(bx.D1)
        norms = math.sqrt(bx.D1.volume * bx.D2.volume * bx.D3.volume)
        scale = Ns[0] ** -1 * Ns[2] ** s * norms
        lb = re * mass
        pt = {"K": Kv, "N_star": Ns, "phase_sup": ph, "re_lower": re, "conv_mass": mass,
              "conv_min_on_D1": cmin, "conv_min_over_K": cmin / Kv ** (d - 1),
              "lower_bound": lb, "C_lower": lb / scale, "C3_used": bx.C3, "C3_adjusted": bx.adjusted,
              "phase_certified": re > 0}
        if d == 1:
            exact = _exact_1d_integral(bx, p, b, t0)
            pt["integral_exact"] = exact
            pt["C_exact"] = exact / scale
        points.append(pt)
        rep.add(Kv, 0, lb / scale)
        if bx.adjusted:
            rep.warnings.append(f"C3 lowered to {bx.C3} so that D1 is nonempty")
        if re == 0:
            rep.warnings.append(f"phase not small at K={Kv} (sup |t Phi| = {ph:.3g}); lower bound vacuous")
    rep.flags["points"] = points
    rep.flags["predicted_exponent"] = (d - 1) / 2 - s if regime == "multiD" else -s
    rep.warnings = list(dict.fromkeys(rep.warnings))
    return rep
