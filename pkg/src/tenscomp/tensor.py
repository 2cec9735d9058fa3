"""Dense N-order tensors: unfoldings, refolding, fibers and mode products.

Tensors are plain ``numpy.ndarray`` objects. Flat storage (files, index
arithmetic) always uses column-major order, i.e. the first index varies
fastest, which makes the mode-1 fibers contiguous and reproduces the
standard column index of the mode-m unfolding::

    j = sum_{k != m} i_k * J_k,   J_k = prod_{l < k, l != m} n_l   (0-based)

Modes are 0-based in the Python API.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Unfolding",
    "as_tensor",
    "check_mode",
    "unfold",
    "refold",
    "fold",
    "mode_multiply",
    "inner",
    "norm",
    "flat_index",
    "multi_index",
]

MAX_ORDER = 8


def as_tensor(values, dims=None, allow_nonfinite=False) -> np.ndarray:
    """Validate ``values`` as a dense real tensor and return a float64 array.

    If ``dims`` is given, ``values`` is taken as flat storage (first index
    fastest) and reshaped accordingly.
    """
    arr = np.asarray(values, dtype=float)
    if dims is not None:
        dims = tuple(int(n) for n in dims)
        if any(n < 1 for n in dims):
            raise ValueError(f"all extents must be >= 1, got {dims}")
        if arr.size != int(np.prod(dims)):
            raise ValueError(
                f"{arr.size} values do not fill a tensor of dims {dims}")
        arr = arr.reshape(dims, order="F")
    if arr.ndim < 1 or arr.ndim > MAX_ORDER:
        raise ValueError(f"tensor order must be in 1..{MAX_ORDER}, got {arr.ndim}")
    if arr.size == 0:
        raise ValueError("tensor has an empty mode")
    if not allow_nonfinite and not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains NaN or Inf")
    return arr


def check_mode(ndim: int, mode: int) -> int:
    if not 0 <= mode < ndim:
        raise ValueError(
            f"mode {mode} out of range for an order-{ndim} tensor "
            f"(valid modes 0..{ndim - 1})")
    return int(mode)


@dataclass(frozen=True)
class Unfolding:
    """Mode-``mode`` unfolding of a tensor with dims ``parent_dims``.

    ``matrix`` has shape ``(n_mode, prod of the other extents)``.
    """

    mode: int
    matrix: np.ndarray
    parent_dims: tuple

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]


def _unfold_matrix(t: np.ndarray, mode: int) -> np.ndarray:
    # moveaxis keeps the remaining modes in increasing order; order="F"
    # then gives the remaining indices first-fastest column numbering.
    return np.reshape(np.moveaxis(t, mode, 0), (t.shape[mode], -1), order="F").copy(order="C")


def unfold(t: np.ndarray, mode: int) -> Unfolding:
    """Return the mode-``mode`` unfolding of ``t`` as a fresh copy."""
    t = np.asarray(t)
    mode = check_mode(t.ndim, mode)
    return Unfolding(mode, _unfold_matrix(t, mode), tuple(t.shape))


def fold(matrix: np.ndarray, mode: int, dims) -> np.ndarray:
    """Inverse of the unfolding: rebuild the tensor of shape ``dims``."""
    dims = tuple(int(n) for n in dims)
    mode = check_mode(len(dims), mode)
    matrix = np.asarray(matrix)
    rest = dims[:mode] + dims[mode + 1:]
    if matrix.ndim != 2 or matrix.shape[0] != dims[mode] or matrix.shape[1] != int(np.prod(rest)):
        raise ValueError(
            f"matrix of shape {matrix.shape} is not a mode-{mode} unfolding "
            f"of a tensor with dims {dims}")
    moved = np.reshape(matrix, (dims[mode],) + rest, order="F")
    return np.ascontiguousarray(np.moveaxis(moved, 0, mode))


def refold(u: Unfolding) -> np.ndarray:
    return fold(u.matrix, u.mode, u.parent_dims)


def mode_multiply(t: np.ndarray, mode: int, y: np.ndarray) -> np.ndarray:
    """Mode product ``t x_mode y``, defined by ``Z_(mode) = y @ X_(mode)``.

    ``y`` has shape ``(J, n_mode)``; the result has ``n_mode`` replaced by J.
    """
    t = np.asarray(t, dtype=float)
    mode = check_mode(t.ndim, mode)
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != t.shape[mode]:
        raise ValueError(
            f"matrix of shape {y.shape} cannot multiply mode {mode} "
            f"of extent {t.shape[mode]}")
    dims = list(t.shape)
    dims[mode] = y.shape[0]
    return fold(y @ _unfold_matrix(t, mode), mode, dims)


def _same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dims mismatch: {a.shape} vs {b.shape}")


def inner(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _same_dims(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def norm(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.dot(a.ravel(), a.ravel())))


def flat_index(index, dims) -> int:
    """0-based flat position of a 0-based multi-index, first index fastest."""
    return int(np.ravel_multi_index(tuple(index), tuple(dims), order="F"))


def multi_index(flat, dims) -> tuple:
    return tuple(int(i) for i in np.unravel_index(int(flat), tuple(dims), order="F"))
