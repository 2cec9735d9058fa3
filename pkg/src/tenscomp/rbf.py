"""Multiquadric radial-basis-function interpolation baseline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lapack
from scipy.spatial.distance import cdist

from .samples import SampleSet

__all__ = ["RbfModel", "multiquadric", "fit_rbf", "fit_rbf_points", "predict_rbf", "reconstruct_rbf",
           "grid_coordinates", "MAX_CONDITION"]

MAX_CONDITION = 1e12


def multiquadric(r, epsilon: float):
    return np.sqrt(1.0 + (np.asarray(r, dtype=float) / epsilon) ** 2)


def grid_coordinates(indices: np.ndarray, scale: Optional[Sequence[float]] = None,
                     axes: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """Physical coordinates of 0-based grid indices.

    ``axes`` gives explicit per-mode coordinates (e.g. heights); otherwise the
    index is multiplied by the per-mode ``scale`` (default 1).
    """
    idx = np.asarray(indices, dtype=np.int64)
    n = idx.shape[1]
    out = np.empty(idx.shape, dtype=float)
    for m in range(n):
        if axes is not None and axes[m] is not None:
            out[:, m] = np.asarray(axes[m], dtype=float)[idx[:, m]]
        else:
            out[:, m] = idx[:, m] * (1.0 if scale is None else float(scale[m]))
    return out


@dataclass
class RbfModel:
    centers: np.ndarray
    weights: np.ndarray
    epsilon: float

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        return predict_rbf(self, coords)


def _factor_symmetric(phi: np.ndarray):
    """LDL^T factorization with a 1-norm reciprocal condition estimate."""
    anorm = np.abs(phi).sum(axis=0).max()
    ldu, ipiv, info = lapack.dsytrf(phi, lower=0)
    if info > 0:
        return ldu, ipiv, 0.0
    if info < 0:
        raise np.linalg.LinAlgError(f"dsytrf: illegal argument {-info}")
    rcond, info = lapack.dsycon(ldu, ipiv, anorm, lower=0)
    return ldu, ipiv, float(rcond)


def fit_rbf_points(coords: np.ndarray, values: np.ndarray, epsilon: float) -> RbfModel:
    """Solve ``Phi w = values`` with ``Phi_kl = phi(|c_k - c_l|)``.

    Raises ``LinAlgError`` when the estimated condition number of ``Phi``
    exceeds ``MAX_CONDITION``.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    centers = np.atleast_2d(np.asarray(coords, dtype=float))
    values = np.asarray(values, dtype=float).reshape(-1)
    if centers.shape[0] != values.shape[0] or centers.shape[0] == 0:
        raise ValueError("need one value per center and at least one center")
    phi = multiquadric(cdist(centers, centers), epsilon)
    ldu, ipiv, rcond = _factor_symmetric(phi)
    if rcond == 0.0 or 1.0 / rcond > MAX_CONDITION:
        raise np.linalg.LinAlgError(
            f"interpolation matrix is ill-conditioned for epsilon={epsilon} "
            f"(condition estimate {np.inf if rcond == 0 else 1 / rcond:.3g}); "
            "try a smaller epsilon")
    w, info = lapack.dsytrs(ldu, ipiv, values, lower=0)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsytrs failed with info={info}")
    return RbfModel(centers, w, float(epsilon))


def fit_rbf(samples: SampleSet, epsilon: float, scale=None, axes=None) -> RbfModel:
    """Fit on the grid coordinates of the sampled positions."""
    return fit_rbf_points(grid_coordinates(samples.indices, scale, axes), samples.values, epsilon)


def predict_rbf(model: RbfModel, coords: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Evaluate ``sum_k w_k phi(|coord - c_k|)`` at each row of ``coords``."""
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 1
    coords = np.atleast_2d(coords)
    out = np.empty(coords.shape[0])
    for start in range(0, coords.shape[0], chunk):
        block = coords[start:start + chunk]
        out[start:start + chunk] = multiquadric(cdist(block, model.centers), model.epsilon) @ model.weights
    return out[0] if single else out


def reconstruct_rbf(samples: SampleSet, epsilon: float, scale=None, axes=None) -> np.ndarray:
    """Fit on ``samples`` and evaluate at every grid cell of ``samples.dims``."""
    if len(samples) == 0:
        raise ValueError("RBF reconstruction needs at least one sample")
    model = fit_rbf(samples, epsilon, scale, axes)
    dims = samples.dims
    grid = np.stack(np.unravel_index(np.arange(int(np.prod(dims))), dims, order="F"), axis=1)
    values = predict_rbf(model, grid_coordinates(grid, scale, axes))
    return values.reshape(dims, order="F")
