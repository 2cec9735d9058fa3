"""Text file formats for tensors, sample sets and gridded CSV tables.

Tensor file::

    TENSOR v1
    dims: n1 n2 ... nN
    scale: s1 s2 ... sN        (optional)
    <values, whitespace separated, first index fastest>

Sample file::

    SAMPLES v1
    dims: n1 n2 ... nN
    i1 i2 ... iN value         (one line per sample, 1-based indices)

Numbers are written in shortest round-trip form (``repr``).
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .samples import SampleSet
from .tensor import as_tensor

__all__ = ["ParseError", "read_tensor", "read_tensor_file", "write_tensor",
           "read_samples", "write_samples", "ingest_grid_csv", "export_grid_csv",
           "format_number"]


class ParseError(ValueError):
    def __init__(self, path, line: Optional[int], message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def format_number(v: float) -> str:
    v = float(v)
    if v == 0.0:
        return "0.0" if math.copysign(1.0, v) > 0 else "-0.0"
    return repr(v)


def _parse_float(tok: str, path, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(path, line, f"non-numeric token {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, line, f"non-finite value {tok!r}")
    return v


def _parse_ints(tokens, path, line: int, what: str) -> list:
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(path, line, f"non-integer {what} {tok!r}") from None
    return out


def _read_header(lines, path, magic: str):
    if not lines or lines[0].strip() != magic:
        raise ParseError(path, 1, f"missing header {magic!r}")
    if len(lines) < 2 or not lines[1].startswith("dims:"):
        raise ParseError(path, 2, "missing 'dims:' line")
    dims = _parse_ints(lines[1][5:].split(), path, 2, "extent")
    if not dims or any(n < 1 for n in dims):
        raise ParseError(path, 2, f"invalid dims {dims}")
    return tuple(dims)


def read_tensor_file(path):
    """Return ``(tensor, scale)``; ``scale`` is ``None`` when absent."""
    path = Path(path)
    lines = path.read_text().splitlines()
    dims = _read_header(lines, path, "TENSOR v1")
    start = 2
    scale = None
    if len(lines) > 2 and lines[2].startswith("scale:"):
        scale = tuple(_parse_float(t, path, 3) for t in lines[2][6:].split())
        if len(scale) != len(dims):
            raise ParseError(path, 3, f"scale has {len(scale)} entries for {len(dims)} modes")
        start = 3
    values = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        values.extend(_parse_float(t, path, lineno) for t in line.split())
    expected = int(np.prod(dims))
    if len(values) != expected:
        raise ParseError(path, None,
                         f"value count mismatch: dims {dims} need {expected}, found {len(values)}")
    return as_tensor(values, dims), scale


def read_tensor(path) -> np.ndarray:
    return read_tensor_file(path)[0]


def write_tensor(t: np.ndarray, path, scale: Optional[Sequence[float]] = None,
                 per_line: Optional[int] = None) -> None:
    """Write ``t``; one line per mode-0 fiber unless ``per_line`` is given."""
    t = as_tensor(t)
    flat = t.ravel(order="F")
    per_line = per_line or t.shape[0]
    out = ["TENSOR v1", "dims: " + " ".join(str(n) for n in t.shape)]
    if scale is not None:
        if len(scale) != t.ndim:
            raise ValueError("scale needs one entry per mode")
        out.append("scale: " + " ".join(format_number(s) for s in scale))
    for i in range(0, flat.size, per_line):
        out.append(" ".join(format_number(v) for v in flat[i:i + per_line]))
    Path(path).write_text("\n".join(out) + "\n")


def read_samples(path) -> SampleSet:
    path = Path(path)
    lines = path.read_text().splitlines()
    dims = _read_header(lines, path, "SAMPLES v1")
    n = len(dims)
    idx, vals, seen = [], [], {}
    for lineno, line in enumerate(lines[2:], start=3):
        toks = line.split()
        if not toks:
            continue
        if len(toks) != n + 1:
            raise ParseError(path, lineno, f"expected {n} indices and a value, got {len(toks)} tokens")
        ii = _parse_ints(toks[:n], path, lineno, "index")
        if any(not 1 <= i <= d for i, d in zip(ii, dims)):
            raise ParseError(path, lineno, f"index {tuple(ii)} outside dims {dims}")
        key = tuple(ii)
        if key in seen:
            raise ParseError(path, lineno, f"duplicate index {key} (first on line {seen[key]})")
        seen[key] = lineno
        idx.append([i - 1 for i in ii])
        vals.append(_parse_float(toks[n], path, lineno))
    if not idx:
        return SampleSet.empty(dims)
    return SampleSet(np.array(idx, dtype=np.int64), np.array(vals), dims)


def write_samples(s: SampleSet, path) -> None:
    out = ["SAMPLES v1", "dims: " + " ".join(str(n) for n in s.dims)]
    for ii, v in zip(s.indices, s.values):
        out.append(" ".join(str(int(i) + 1) for i in ii) + " " + format_number(v))
    Path(path).write_text("\n".join(out) + "\n")


DEFAULT_COLUMNS = {"x": "x", "y": "y", "height": "height", "value": "value"}


def ingest_grid_csv(path, column_map: Optional[dict] = None, crop=None):
    """Read a gridded ``x, y, height, value`` table into an ``(x, y, height)`` tensor.

    Axis coordinates are the sorted distinct values of each column. ``crop``
    optionally restricts each axis to a ``(lo, hi)`` coordinate range
    (inclusive) before the completeness check. Returns ``(tensor, axes)``.
    """
    path = Path(path)
    cols = dict(DEFAULT_COLUMNS, **(column_map or {}))
    keys = ("x", "y", "height")
    rows = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(path, 1, "empty CSV")
        missing = [cols[k] for k in keys + ("value",) if cols[k] not in reader.fieldnames]
        if missing:
            raise ParseError(path, 1, f"columns not found: {missing}")
        for lineno, rec in enumerate(reader, start=2):
            coord = tuple(_parse_float(rec[cols[k]], path, lineno) for k in keys)
            rows.append((coord, _parse_float(rec[cols["value"]], path, lineno), lineno))
    if crop is not None:
        rows = [r for r in rows
                if all(lim is None or lim[0] <= c <= lim[1] for c, lim in zip(r[0], crop))]
    if not rows:
        raise ParseError(path, None, "no grid cells")
    axes = [np.unique([r[0][a] for r in rows]) for a in range(3)]
    dims = tuple(len(a) for a in axes)
    out = np.full(dims, np.nan)
    for coord, value, lineno in rows:
        pos = tuple(int(np.searchsorted(axes[a], coord[a])) for a in range(3))
        if not np.isnan(out[pos]):
            raise ParseError(path, lineno, f"duplicate grid cell {coord}")
        out[pos] = value
    holes = np.argwhere(np.isnan(out))
    if holes.size:
        shown = ", ".join(str(tuple(float(axes[a][i]) for a, i in enumerate(h))) for h in holes[:10])
        raise ParseError(path, None,
                         f"incomplete grid: {len(holes)} missing cells, e.g. {shown}")
    return out, axes


def export_grid_csv(t: np.ndarray, path, scale: Optional[Sequence[float]] = None) -> None:
    """Write an order-3 tensor as an ``x,y,height,value`` table (inverse of ingestion)."""
    t = as_tensor(t)
    if t.ndim != 3:
        raise ValueError("grid export expects an (x, y, height) tensor")
    scale = scale or (1.0, 1.0, 1.0)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "height", "value"])
        for k in range(t.shape[2]):
            for j in range(t.shape[1]):
                for i in range(t.shape[0]):
                    w.writerow([format_number(i * scale[0]), format_number(j * scale[1]),
                                format_number(k * scale[2]), format_number(t[i, j, k])])
