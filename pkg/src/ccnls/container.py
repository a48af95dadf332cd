"""Flat binary container for fields and space-time samples.

Layout: a fixed little-endian header followed by complex64 values in
row-major (t, x_1, ..., x_d, component) order. A JSON sidecar with the
same stem carries free-form metadata.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .fields import Field, Grid, SpaceTimeSample

MAGIC = b"CCNLSBIN"
VERSION = 1
_HEADER = struct.Struct("<8sIIdIIdI")


def _as_tx(obj) -> tuple[Grid, int, float, float, np.ndarray]:
    """Return (grid, Q, dt, t0, array shaped (Q, *space, ncomp))."""
    if isinstance(obj, Field):
        a = obj.values[None]
        return obj.grid, 1, 0.0, 0.0, np.moveaxis(a, 1, -1)
    if isinstance(obj, SpaceTimeSample):
        return obj.grid, obj.Q, obj.dt, obj.t0, np.moveaxis(obj.values, 1, -1)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_container(path, obj, metadata: dict | None = None) -> Path:
    """Write ``obj`` (Field or SpaceTimeSample) and its JSON sidecar."""
    path = Path(path)
    grid, Q, dt, t0, arr = _as_tx(obj)
    ncomp = arr.shape[-1]
    header = _HEADER.pack(MAGIC, VERSION, grid.d, grid.L, grid.M, Q, dt, ncomp)
    body = np.ascontiguousarray(arr, dtype="<c8").tobytes()
    try:
        path.write_bytes(header + body)
        meta = {"kind": type(obj).__name__, "t0": t0, **(metadata or {})}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing container {path}: {exc}") from exc
    return path


def read_header(path) -> dict:
    raw = Path(path).read_bytes()[: _HEADER.size]
    magic, version, d, L, M, Q, dt, ncomp = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise ValueError(f"{path} is not a field container")
    return {"version": version, "d": d, "L": L, "M": M, "Q": Q, "dt": dt, "ncomp": ncomp}


def read_container(path):
    """Inverse of write_container (values come back at complex64 precision)."""
    path = Path(path)
    h = read_header(path)
    grid = Grid(h["d"], h["L"], h["M"])
    raw = path.read_bytes()[_HEADER.size:]
    shape = (h["Q"],) + grid.shape + (h["ncomp"],)
    arr = np.frombuffer(raw, dtype="<c8").reshape(shape).astype(np.complex128)
    arr = np.moveaxis(arr, -1, 1)
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    if meta.get("kind") == "Field" or (h["Q"] == 1 and h["dt"] == 0.0):
        return Field(grid, arr[0])
    return SpaceTimeSample(grid, float(meta.get("t0", 0.0)), h["dt"], arr)
