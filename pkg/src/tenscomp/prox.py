"""Proximal maps used by the completion solvers.

Every operator here is a pure function of its inputs. ``gamma`` is the
proximal parameter: ``prox_{gamma f}(x) = argmin_y f(y) + ||x - y||^2 / (2 gamma)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solveh_banded

from ._tv1d import tv1d, tv1d_rows
from .samples import SampleSet
from .tensor import _unfold_matrix, check_mode, fold, mode_multiply

__all__ = [
    "shrink",
    "prox_nuclear",
    "prox_data_fidelity",
    "TridiagonalOperator",
    "build_tridiagonal",
    "prox_l2tv",
    "prox_l1tv_fiber",
    "prox_l1tv",
    "consensus_mean",
]


def shrink(x: np.ndarray, tau: float) -> np.ndarray:
    """Singular value soft-thresholding of the matrix ``x`` by ``tau``."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("shrink: matrix contains NaN or Inf")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    r = int(np.count_nonzero(s))
    if r == 0:
        return np.zeros_like(x)
    return (u[:, :r] * s[:r]) @ vt[:r]


def prox_nuclear(t: np.ndarray, mode: int, gamma: float) -> np.ndarray:
    """Prox of the nuclear norm of the mode-``mode`` unfolding."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    t = np.asarray(t, dtype=float)
    mode = check_mode(t.ndim, mode)
    return fold(shrink(_unfold_matrix(t, mode), gamma), mode, t.shape)


def prox_data_fidelity(t: np.ndarray, samples: SampleSet, lam: float,
                       gamma: float) -> np.ndarray:
    """Prox of ``lam/2 * ||A(x) - b||^2`` for the sampling operator ``A``.

    Sampled entries become ``(lam*gamma*b + x) / (lam*gamma + 1)``; all other
    entries are copied unchanged.
    """
    if lam <= 0 or gamma <= 0:
        raise ValueError(f"lambda and gamma must be > 0, got {lam}, {gamma}")
    t = np.asarray(t, dtype=float)
    if t.shape != samples.dims:
        raise ValueError(f"dims mismatch: {t.shape} vs {samples.dims}")
    out = t.copy()
    if len(samples):
        pos = tuple(samples.indices.T)
        lg = lam * gamma
        out[pos] = (lg * samples.values + t[pos]) / (lg + 1.0)
    return out


@dataclass(frozen=True)
class TridiagonalOperator:
    """``(1/gamma) A^{-1}`` for the L2-TV fiber system ``A y = x / gamma``.

    ``A`` is tridiagonal Toeplitz with ``4*alpha + 1/gamma`` on the diagonal
    and ``-2*alpha`` off it. With ``heuristic`` set, the rows of the matrix
    are rescaled to sum to one.
    """

    size: int
    alpha: float
    gamma: float
    heuristic: bool
    matrix: np.ndarray

    def system_matrix(self) -> np.ndarray:
        k = self.size
        a = np.diag(np.full(k, 4 * self.alpha + 1 / self.gamma))
        if k > 1:
            off = np.full(k - 1, -2 * self.alpha)
            a += np.diag(off, 1) + np.diag(off, -1)
        return a

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x


@lru_cache(maxsize=256)
def _tridiagonal_inverse(k: int, alpha: float, gamma: float, heuristic: bool) -> np.ndarray:
    if alpha == 0.0:
        m = np.eye(k)
    elif k == 1:
        m = np.array([[1.0 / (gamma * (4.0 * alpha + 1.0 / gamma))]])
    else:
        # upper banded storage for solveh_banded
        ab = np.empty((2, k))
        ab[0, :] = -2.0 * alpha
        ab[1, :] = 4.0 * alpha + 1.0 / gamma
        m = solveh_banded(ab, np.eye(k) / gamma)
        m = 0.5 * (m + m.T)
    if heuristic:
        m = m / m.sum(axis=1, keepdims=True)
    m.flags.writeable = False
    return m


def build_tridiagonal(k: int, alpha: float, gamma: float,
                      heuristic: bool = False) -> TridiagonalOperator:
    if k < 1:
        raise ValueError(f"fiber length must be >= 1, got {k}")
    if alpha < 0 or gamma <= 0:
        raise ValueError(f"need alpha >= 0 and gamma > 0, got {alpha}, {gamma}")
    m = _tridiagonal_inverse(int(k), float(alpha), float(gamma), bool(heuristic))
    return TridiagonalOperator(int(k), float(alpha), float(gamma), bool(heuristic), m)


def prox_l2tv(t: np.ndarray, mode: int, alpha: float, gamma: float,
              heuristic: bool = False) -> np.ndarray:
    """Closed-form L2-TV step along the mode-``mode`` fibers.

    Computes ``t x_mode (1/gamma) A^{-1}``. Note that the system matrix carries
    ``4*alpha`` in the first and last diagonal entries too, so without the
    heuristic this is the prox of ``alpha * (sum (y[k+1]-y[k])^2 + y[0]^2 + y[-1]^2)``
    per fiber, which is why fiber ends are pulled toward zero.
    """
    t = np.asarray(t, dtype=float)
    mode = check_mode(t.ndim, mode)
    op = build_tridiagonal(t.shape[mode], alpha, gamma, heuristic)
    if alpha == 0.0 and not heuristic:
        return t.copy()
    return mode_multiply(t, mode, op.matrix)


def prox_l1tv_fiber(x: np.ndarray, w: float) -> np.ndarray:
    """Exact prox of ``w * sum |y[k+1] - y[k]|`` at the vector ``x``."""
    if w < 0:
        raise ValueError(f"weight must be >= 0, got {w}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1D fiber")
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("prox_l1tv_fiber: non-finite input")
    return tv1d(x, w)


def prox_l1tv(t: np.ndarray, mode: int, alpha: float, gamma: float) -> np.ndarray:
    """Apply :func:`prox_l1tv_fiber` with weight ``gamma*alpha`` to every mode fiber."""
    if alpha < 0 or gamma <= 0:
        raise ValueError(f"need alpha >= 0 and gamma > 0, got {alpha}, {gamma}")
    t = np.asarray(t, dtype=float)
    mode = check_mode(t.ndim, mode)
    if alpha == 0.0 or t.shape[mode] == 1:
        return t.copy()
    if not np.all(np.isfinite(t)):
        raise FloatingPointError("prox_l1tv: non-finite input")
    fibers = _unfold_matrix(t, mode).T
    return fold(tv1d_rows(fibers, gamma * alpha).T, mode, t.shape)


def consensus_mean(blocks) -> np.ndarray:
    """Average of the blocks, i.e. the projection onto the consensus set.

    Summed in block order as ``z_0 + sum_i (z_i - z_0) / M`` so that identical
    blocks are returned bitwise unchanged.
    """
    blocks = list(blocks)
    if not blocks:
        raise ValueError("need at least one block")
    first = np.asarray(blocks[0], dtype=float)
    acc = np.zeros_like(first)
    for z in blocks[1:]:
        z = np.asarray(z, dtype=float)
        if z.shape != first.shape:
            raise ValueError(f"dims mismatch: {z.shape} vs {first.shape}")
        acc += z - first
    return first + acc / len(blocks)
