"""The three completion objectives, their operator lists, and the NMSE metric."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np

from . import dr
from .prox import prox_data_fidelity, prox_l1tv, prox_l2tv, prox_nuclear
from .samples import SampleSet

__all__ = ["Method", "ProblemSpec", "build_prox_list", "objective_value", "tv1",
           "tv2", "nuclear_sum", "nmse_db", "evaluate_unsampled", "complete"]


class Method(str, enum.Enum):
    RANK = "rank"
    L2TV = "l2tv"
    L1TV = "l1tv"

    @property
    def has_tv(self) -> bool:
        return self is not Method.RANK


@dataclass
class ProblemSpec:
    method: Method
    alphas: Optional[Sequence[float]] = None
    heuristic: bool = True
    solver: dr.SolverConfig = field(default_factory=dr.SolverConfig)

    def __post_init__(self):
        self.method = Method(self.method)
        if self.method.has_tv:
            if self.alphas is None:
                raise ValueError(f"method {self.method.value} needs one alpha per mode")
            self.alphas = tuple(float(a) for a in self.alphas)
            if any(a < 0 for a in self.alphas):
                raise ValueError("alphas must be >= 0")
        if self.method is not Method.L2TV:
            self.heuristic = False

    def check_dims(self, dims) -> None:
        if self.method.has_tv and len(self.alphas) != len(dims):
            raise ValueError(
                f"{len(self.alphas)} alphas given for an order-{len(dims)} tensor")


def _nuclear(mode, z, gamma):
    return prox_nuclear(z, mode, gamma)


def _l2tv(mode, alpha, heuristic, z, gamma):
    return prox_l2tv(z, mode, alpha, gamma, heuristic)


def _l1tv(mode, alpha, z, gamma):
    return prox_l1tv(z, mode, alpha, gamma)


def _fidelity(samples, z, gamma, lam):
    return prox_data_fidelity(z, samples, lam, gamma)


def build_prox_list(spec: ProblemSpec, dims, samples: SampleSet) -> list:
    """Operators in order: TV terms (TV methods only), nuclear norms, data fidelity.

    The data-fidelity operator is always last and takes ``(z, gamma, lam)``.
    """
    dims = tuple(dims)
    if samples.dims != dims:
        raise ValueError(f"sample dims {samples.dims} differ from {dims}")
    spec.check_dims(dims)
    n = len(dims)
    ops = []
    if spec.method is Method.L2TV:
        ops += [partial(_l2tv, m, spec.alphas[m], spec.heuristic) for m in range(n)]
    elif spec.method is Method.L1TV:
        ops += [partial(_l1tv, m, spec.alphas[m]) for m in range(n)]
    ops += [partial(_nuclear, m) for m in range(n)]
    ops.append(partial(_fidelity, samples))
    return ops


def _fiber_diffs(x: np.ndarray, mode: int) -> np.ndarray:
    return np.diff(x, axis=mode)


def tv2(x: np.ndarray, mode: int) -> float:
    """Sum of squared neighbour differences along the mode-``mode`` fibers."""
    d = _fiber_diffs(np.asarray(x, dtype=float), mode)
    return float(np.sum(d * d))


def tv1(x: np.ndarray, mode: int) -> float:
    return float(np.sum(np.abs(_fiber_diffs(np.asarray(x, dtype=float), mode))))


def nuclear_sum(x: np.ndarray) -> float:
    from .tensor import _unfold_matrix
    x = np.asarray(x, dtype=float)
    return float(sum(np.linalg.svd(_unfold_matrix(x, m), compute_uv=False).sum()
                     for m in range(x.ndim)))


def objective_value(spec: ProblemSpec, x: np.ndarray, samples: SampleSet, lam: float) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != samples.dims:
        raise ValueError(f"dims mismatch: {x.shape} vs {samples.dims}")
    spec.check_dims(x.shape)
    total = nuclear_sum(x)
    if spec.method.has_tv:
        tv = tv2 if spec.method is Method.L2TV else tv1
        total += sum(a * tv(x, m) for m, a in enumerate(spec.alphas) if a)
    if lam:
        r = samples.gather(x) - samples.values
        total += 0.5 * lam * float(np.dot(r, r))
    return total


def nmse_db(estimate: np.ndarray, truth: np.ndarray, holdout) -> float:
    """NMSE in dB over the positions in ``holdout``.

    ``holdout`` is a boolean mask or an ``(h, N)`` array of 0-based indices.
    Returns ``-inf`` for an exact reconstruction.
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError(f"dims mismatch: {estimate.shape} vs {truth.shape}")
    holdout = np.asarray(holdout)
    if holdout.dtype == bool:
        if holdout.shape != truth.shape:
            raise ValueError("holdout mask has the wrong shape")
        xh, xt = estimate[holdout], truth[holdout]
    else:
        pos = tuple(holdout.reshape(-1, truth.ndim).T)
        xh, xt = estimate[pos], truth[pos]
    if xt.size == 0:
        raise ValueError("holdout set is empty")
    num = float(np.sum((xh - xt) ** 2))
    den = float(np.sum(xt ** 2))
    if num == 0.0:
        return -math.inf
    if den == 0.0:
        raise ValueError("NMSE undefined: truth is zero on the holdout set")
    return 10.0 * math.log10(num / den)


def evaluate_unsampled(estimate: np.ndarray, truth: np.ndarray, samples: SampleSet) -> float:
    """NMSE over every position that was not given to the reconstruction."""
    given = samples.mask()
    holdout = ~given
    assert not np.any(holdout & given)
    return nmse_db(estimate, truth, holdout)


def complete(spec: ProblemSpec, samples: SampleSet, init: Optional[np.ndarray] = None):
    """Solve ``spec`` for the given samples; returns ``(estimate, SolverReport)``.

    All DR blocks start from the scattered samples unless ``init`` is given.
    """
    dims = samples.dims
    ops = build_prox_list(spec, dims, samples)
    x0 = samples.adjoint() if init is None else np.asarray(init, dtype=float)

    def misfit(x):
        return float(np.linalg.norm(samples.gather(x) - samples.values))

    def objective(x, lam):
        return objective_value(spec, x, samples, lam)

    return dr.solve(ops, x0, spec.solver, lambda_index=len(ops) - 1,
                    misfit=misfit, objective=objective)
