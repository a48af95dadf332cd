"""Least-squares power-law fits and the estimate report container."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

MIN_SLOPE_POINTS = 5
MIN_ENSEMBLE = 20


@dataclass(frozen=True)
class LogLogFit:
    x: tuple[float, ...]
    y: tuple[float, ...]
    slope: float
    intercept: float
    stderr: float
    residual: float

    @property
    def ci(self) -> float:
        """Half-width of the normal-approximation 95% band on the slope."""
        return 1.96 * self.stderr


def loglog_fit(x, y, min_points: int = 2) -> LogLogFit:
    """Fit log y = slope * log x + intercept. Zero or negative y are rejected."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D of equal length")
    if len(x) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(x)}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("degenerate abscissae")
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    r = ly - A @ coef
    dof = len(x) - 2
    s2 = float(r @ r) / dof if dof > 0 else 0.0
    stderr = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    return LogLogFit(tuple(x), tuple(y), float(coef[0]), float(coef[1]), stderr,
                     float(np.sqrt(np.mean(r * r))))


@dataclass
class EstimateReport:
    """Ratio samples of an estimate experiment, reduced to a sup per scale and a slope."""

    name: str
    descriptors: dict
    samples: list[dict] = field(default_factory=list)  # rows: scale, member, ratio
    warnings: list[str] = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    CSV_COLUMNS = ("scale", "member", "ratio")

    def add(self, scale: float, member: int, ratio: float):
        self.samples.append({"scale": float(scale), "member": int(member), "ratio": float(ratio)})

    @property
    def scales(self) -> list[float]:
        return sorted({r["scale"] for r in self.samples})

    @property
    def sup_ratio(self) -> list[float]:
        return [max(r["ratio"] for r in self.samples if r["scale"] == s) for s in self.scales]

    def fit(self) -> LogLogFit | None:
        sc, sup = self.scales, self.sup_ratio
        if len(sc) < MIN_SLOPE_POINTS or min(sup, default=0.0) <= 0:
            return None
        return loglog_fit(sc, sup)

    @property
    def slope(self) -> float | None:
        f = self.fit()
        return None if f is None else f.slope

    def summary(self) -> dict:
        f = self.fit()
        return {
            "name": self.name,
            "descriptors": self.descriptors,
            "scales": self.scales,
            "sup_ratio": self.sup_ratio,
            "n_points": len(self.scales),
            "slope": None if f is None else f.slope,
            "intercept": None if f is None else f.intercept,
            "ci": None if f is None else f.ci,
            "residual": None if f is None else f.residual,
            "warnings": list(self.warnings),
            "flags": dict(self.flags),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in sorted(self.samples, key=lambda r: (r["scale"], r["member"])):
            w.writerow([repr(r["scale"]), r["member"], repr(r["ratio"])])
        return buf.getvalue()

    @classmethod
    def merge(cls, reports: list["EstimateReport"]) -> "EstimateReport":
        """Associative reduction of reports that share a name and descriptors."""
        out = cls(reports[0].name, dict(reports[0].descriptors))
        for r in reports:
            out.samples.extend(r.samples)
            out.warnings.extend(w for w in r.warnings if w not in out.warnings)
            out.flags.update(r.flags)
        return out
