"""Run manifests and deterministic report emission (CSV + JSON + manifest)."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__


def sanitize(obj):
    """JSON-safe copy: numpy scalars unwrapped, tuples listed, NaN and inf spelled out."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, np.generic):
        return sanitize(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if hasattr(obj, "value") and hasattr(obj, "name"):   # enums
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(sanitize(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    params: dict
    seeds: dict
    version: str = __version__

    def to_json(self) -> dict:
        body = {"subcommand": self.subcommand, "params": sanitize(self.params),
                "seeds": sanitize(self.seeds), "version": self.version}
        return {**body, "hash": self.content_hash()}

    def content_hash(self) -> str:
        body = {"subcommand": self.subcommand, "params": self.params, "seeds": self.seeds,
                "version": self.version}
        return hashlib.sha256(json.dumps(sanitize(body), sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_json(cls, d: dict) -> "RunManifest":
        m = cls(d["subcommand"], d["params"], d.get("seeds", {}), d.get("version", __version__))
        if "hash" in d and d["hash"] != m.content_hash():
            raise ValueError("manifest hash does not match its contents")
        return m


def find_seeds(params: dict, prefix: str = "") -> dict:
    """Every parameter named 'seed' (at any depth), keyed by its dotted path."""
    out = {}
    for k, v in params.items():
        path = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(find_seeds(v, path + "."))
        elif k == "seed":
            out[path] = v
    return out


def override_seeds(params: dict, seed: int) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, dict):
            out[k] = override_seeds(v, seed)
        else:
            out[k] = int(seed) if k == "seed" else v
    return out


class ReportError(OSError):
    """Writing a report failed; the message names the run directory."""


def run_dir(root, manifest: RunManifest) -> Path:
    return Path(root) / f"{manifest.subcommand}-{manifest.content_hash()[:16]}"


def emit_report(output, manifest: RunManifest, root, figures: bool = False) -> Path:
    """Write manifest.json, summary.json and one CSV per table under the hashed run directory.

    Re-emitting the same output gives byte-identical files. Figures and binary
    artifacts are written only when requested.
    """
    d = run_dir(root, manifest)
    try:
        d.mkdir(parents=True, exist_ok=True)
        (d / "manifest.json").write_text(dumps(manifest.to_json()))
        summary = {"summary": output.summary, "passed": output.passed, "message": output.message}
        (d / "summary.json").write_text(dumps(summary))
        for name, (cols, rows) in sorted(output.tables.items()):
            (d / f"{name}.csv").write_text(csv_text(cols, rows))
        for art in output.artifacts:
            art(d)
        if figures and output.figures:
            from .plotting import render_all
            render_all(output.figures, d)
    except OSError as exc:
        raise ReportError(f"cannot write report under {d}: {exc}") from exc
    return d


def tree_hash(d) -> str:
    """sha256 over (relative path, bytes) of every file under d, in sorted order."""
    d = Path(d)
    h = hashlib.sha256()
    for f in sorted(p for p in d.rglob("*") if p.is_file()):
        h.update(str(f.relative_to(d)).encode())
        h.update(f.read_bytes())
    return h.hexdigest()
