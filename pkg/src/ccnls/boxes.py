"""Exact arithmetic for indicator functions of axis-aligned boxes.

The convolution of two interval indicators is a trapezoid, so the
convolution of two boxes is a product of trapezoids. Everything here is
evaluated in closed form; nothing touches an FFT grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoxRegion:
    """Product of closed intervals [lo_i, hi_i]."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    degenerate_ok: bool = False

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.lo))
        hi = tuple(float(x) for x in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have the same length")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        if not self.degenerate_ok and any(l == h for l, h in zip(lo, hi)):
            raise ValueError(f"degenerate box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, *intervals, degenerate_ok=False) -> "BoxRegion":
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals), degenerate_ok)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> np.ndarray:
        return np.subtract(self.hi, self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def reflect(self) -> "BoxRegion":
        """The box -B, support of the transform of conj(f) when F[f] = 1_B."""
        return BoxRegion(tuple(-h for h in self.hi), tuple(-l for l in self.lo), self.degenerate_ok)

    def contains(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.ones(xi.shape[:-1], dtype=bool)
        for i in range(self.d):
            out &= (xi[..., i] >= self.lo[i]) & (xi[..., i] <= self.hi[i])
        return out

    def corners(self) -> np.ndarray:
        grids = np.meshgrid(*[(l, h) for l, h in zip(self.lo, self.hi)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.d))


class PiecewisePoly1D:
    """Continuous piecewise polynomial, zero outside [x_0, x_n].

    ``coeffs[k]`` holds ascending-power coefficients in (x - x_k) on
    [x_k, x_{k+1}].
    """

    def __init__(self, breaks, coeffs):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coeffs = [np.asarray(c, dtype=float) for c in coeffs]
        if len(self.coeffs) != len(self.breaks) - 1:
            raise ValueError("need one coefficient vector per interval")
        if np.any(np.diff(self.breaks) < 0):
            raise ValueError("breakpoints must be nondecreasing")

    @classmethod
    def trapezoid(cls, a: tuple[float, float], b: tuple[float, float]) -> "PiecewisePoly1D":
        """1_[a0,a1] * 1_[b0,b1]: rises with slope 1, plateau min(width), falls."""
        wa, wb = a[1] - a[0], b[1] - b[0]
        lo, small, big = a[0] + b[0], min(wa, wb), max(wa, wb)
        x = [lo, lo + small, lo + big, lo + small + big]
        return cls(x, [[0.0, 1.0], [small, 0.0], [small, -1.0]])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, c in enumerate(self.coeffs):
            x0, x1 = self.breaks[k], self.breaks[k + 1]
            if x1 <= x0:
                continue
            m = (x >= x0) & (x <= x1)
            out[m] = np.polynomial.polynomial.polyval(x[m] - x0, c)
        return out

    def _points_in(self, lo: float, hi: float) -> np.ndarray:
        inner = self.breaks[(self.breaks > lo) & (self.breaks < hi)]
        pts = [lo, hi, *inner]
        # interior critical points of higher-degree pieces
        for k, c in enumerate(self.coeffs):
            if len(c) > 2:
                for r in np.polynomial.polynomial.polyroots(np.polynomial.polynomial.polyder(c)):
                    if abs(r.imag) < 1e-14:
                        x = self.breaks[k] + r.real
                        if lo < x < hi and self.breaks[k] <= x <= self.breaks[k + 1]:
                            pts.append(x)
        return np.array(pts)

    def min_on(self, lo: float, hi: float) -> float:
        return float(self(self._points_in(lo, hi)).min())

    def max_on(self, lo: float, hi: float) -> float:
        return float(self(self._points_in(lo, hi)).max())

    def integral(self, lo: float = -np.inf, hi: float = np.inf) -> float:
        total = 0.0
        P = np.polynomial.polynomial
        for k, c in enumerate(self.coeffs):
            x0 = self.breaks[k]
            a, b = max(x0, lo), min(self.breaks[k + 1], hi)
            if b <= a:
                continue
            ci = P.polyint(c)
            total += P.polyval(b - x0, ci) - P.polyval(a - x0, ci)
        return float(total)

    def pieces_in(self, lo: float, hi: float) -> list[tuple[float, float]]:
        """Sub-intervals of [lo, hi] on which the function is a single polynomial."""
        cuts = np.unique(np.clip(np.concatenate([[lo, hi], self.breaks]), lo, hi))
        return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


@dataclass
class BoxConvolution:
    """Product over axes of trapezoid profiles: the exact value of 1_A * 1_B."""

    axes: list[PiecewisePoly1D]

    def __call__(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.ones(xi.shape[0])
        for i, f in enumerate(self.axes):
            out *= f(xi[:, i])
        return out

    def min_on(self, box: BoxRegion) -> float:
        # factors are nonnegative, so the minimum of the product is the product of minima
        return float(np.prod([f.min_on(l, h) for f, l, h in zip(self.axes, box.lo, box.hi)]))

    def max_on(self, box: BoxRegion) -> float:
        return float(np.prod([f.max_on(l, h) for f, l, h in zip(self.axes, box.lo, box.hi)]))

    def integral_on(self, box: BoxRegion) -> float:
        """int_box (1_A * 1_B)(xi) d xi, exactly."""
        return float(np.prod([f.integral(l, h) for f, l, h in zip(self.axes, box.lo, box.hi)]))


def box_convolution(a: BoxRegion, b: BoxRegion) -> BoxConvolution:
    if a.d != b.d:
        raise ValueError("boxes live in different dimensions")
    return BoxConvolution([PiecewisePoly1D.trapezoid((a.lo[i], a.hi[i]), (b.lo[i], b.hi[i]))
                           for i in range(a.d)])


def monte_carlo_convolution(a: BoxRegion, b: BoxRegion, xi, n: int = 20000, seed: int = 0):
    """Independent estimate of (1_A * 1_B)(xi) = |A ∩ (xi - B)|, with its standard error."""
    rng = np.random.default_rng(seed)
    pts = a.sample(rng, n)
    xi = np.asarray(xi, dtype=float)
    hit = b.contains(xi[None, :] - pts).astype(float)
    mean = hit.mean()
    return a.volume * mean, a.volume * hit.std(ddof=1) / np.sqrt(n)


def box_quadrature(box: BoxRegion, fn, conv: BoxConvolution | None = None, order: int = 12) -> float:
    """Tensor Gauss-Legendre integral of fn(xi) over a box.

    If ``conv`` is given the box is split along its breakpoints so that the
    integrand is smooth on each cell.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    per_axis = []
    for i in range(box.d):
        cuts = conv.axes[i].pieces_in(box.lo[i], box.hi[i]) if conv else [(box.lo[i], box.hi[i])]
        xs, ws = [], []
        for lo, hi in cuts:
            xs.append(0.5 * (hi - lo) * nodes + 0.5 * (hi + lo))
            ws.append(0.5 * (hi - lo) * weights)
        per_axis.append((np.concatenate(xs), np.concatenate(ws)))
    grids = np.meshgrid(*[x for x, _ in per_axis], indexing="ij")
    wgrid = np.ones_like(grids[0])
    for i, (_, w) in enumerate(per_axis):
        shape = [1] * box.d
        shape[i] = -1
        wgrid = wgrid * w.reshape(shape)
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    return float(np.sum(np.asarray(fn(pts)).ravel() * wgrid.ravel()))
