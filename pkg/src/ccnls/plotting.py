"""PNG figures for report directories, rendered off-screen with byte-stable output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

METADATA = {"Software": None}


def _positive(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None and x > 0 and y > 0]
    return [p[0] for p in pts], [p[1] for p in pts]


def render(spec: dict, out_dir) -> Path:
    """Render one figure spec.

    kind 'loglog' or 'series'; keys name, x, ys (label -> values), xlabel,
    ylabel, and optionally logy or ref_slope (a dashed guide line).
    """
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=100)
    loglog = spec["kind"] == "loglog"
    for label, ys in sorted(spec["ys"].items()):
        xs, yv = _positive(spec["x"], ys) if loglog or spec.get("logy") else (spec["x"], ys)
        if xs:
            ax.plot(xs, yv, marker="o", ms=3, label=label)
    slope = spec.get("ref_slope")
    if loglog and slope is not None:
        first = next((v for v in spec["ys"].values() if _positive(spec["x"], v)[0]), None)
        if first is not None:
            xs, yv = _positive(spec["x"], first)
            x = np.array(xs, dtype=float)
            ax.plot(x, yv[0] * (x / x[0]) ** slope, "k--", lw=0.8, label=f"slope {slope:g}")
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    elif spec.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel(spec.get("xlabel", ""))
    ax.set_ylabel(spec.get("ylabel", ""))
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = Path(out_dir) / f"{spec['name']}.png"
    fig.savefig(path, metadata=METADATA)
    plt.close(fig)
    return path


def render_all(specs, out_dir) -> list[Path]:
    return [render(s, out_dir) for s in specs]
