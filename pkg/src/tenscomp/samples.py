"""Observed entries of a tensor and the sampling operator built from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SampleSet"]


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sampled positions ``indices`` (0-based, shape ``(p, N)``) with ``values``.

    Acts as the sampling operator: :meth:`gather` maps a tensor to the
    vector of its values at the sampled positions and :meth:`adjoint`
    scatters a vector back into a zero tensor.
    """

    indices: np.ndarray
    values: np.ndarray
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims or any(n < 1 for n in dims):
            raise ValueError(f"invalid dims {self.dims}")
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, len(dims))
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if idx.shape[0] != vals.shape[0]:
            raise ValueError(
                f"{idx.shape[0]} indices but {vals.shape[0]} values")
        if idx.size and (np.any(idx < 0) or np.any(idx >= np.array(dims))):
            bad = np.flatnonzero(np.any((idx < 0) | (idx >= np.array(dims)), axis=1))[0]
            raise ValueError(
                f"sample index {tuple(int(i) + 1 for i in idx[bad])} (1-based) "
                f"outside dims {dims}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        flat = np.ravel_multi_index(tuple(idx.T), dims, order="F") if idx.size else np.zeros(0, np.int64)
        if np.unique(flat).size != flat.size:
            raise ValueError("duplicate sample positions")
        idx.flags.writeable = False
        vals.flags.writeable = False
        flat.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_flat", flat)

    @classmethod
    def from_tensor(cls, truth: np.ndarray, flat_positions) -> "SampleSet":
        """Gather ``truth`` at the given flat (first-index-fastest) positions."""
        truth = np.asarray(truth, dtype=float)
        flat = np.asarray(flat_positions, dtype=np.int64).reshape(-1)
        if flat.size and (flat.min() < 0 or flat.max() >= truth.size):
            raise ValueError("mask position outside the tensor")
        idx = np.stack(np.unravel_index(flat, truth.shape, order="F"), axis=1) if flat.size \
            else np.zeros((0, truth.ndim), np.int64)
        return cls(idx, truth.ravel(order="F")[flat], truth.shape)

    @classmethod
    def empty(cls, dims) -> "SampleSet":
        return cls(np.zeros((0, len(dims)), np.int64), np.zeros(0), tuple(dims))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Flat positions of the samples, first index fastest."""
        return self._flat

    def subset(self, rows) -> "SampleSet":
        rows = np.asarray(rows, dtype=np.int64)
        return SampleSet(self.indices[rows], self.values[rows], self.dims)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.dims, dtype=bool)
        if len(self):
            m[tuple(self.indices.T)] = True
        return m

    def gather(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != self.dims:
            raise ValueError(f"dims mismatch: {x.shape} vs {self.dims}")
        return x[tuple(self.indices.T)] if len(self) else np.zeros(0)

    def adjoint(self, b=None) -> np.ndarray:
        """Scatter ``b`` (default: the sample values) into a zero tensor."""
        b = self.values if b is None else np.asarray(b, dtype=float)
        out = np.zeros(self.dims)
        if len(self):
            out[tuple(self.indices.T)] = b
        return out

    def same_entries(self, other: "SampleSet") -> bool:
        a = np.argsort(self._flat)
        b = np.argsort(other._flat)
        return (self.dims == other.dims
                and np.array_equal(self._flat[a], other._flat[b])
                and np.array_equal(self.values[a], other.values[b]))
