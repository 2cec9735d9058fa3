"""Holdout cross-validation for the regularization weights and the RBF shape."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .datagen import HOLDOUT, rng_for
from .dr import DivergenceError, SolverConfig
from .problems import ProblemSpec, complete, nmse_db
from .rbf import reconstruct_rbf
from .samples import SampleSet

__all__ = ["METHODS", "DEFAULT_ALPHAS", "DEFAULT_EPSILONS", "CvConfig", "TuningError",
           "holdout_split", "alpha_grid", "candidates", "fit_method", "grid_search",
           "tune_and_fit", "format_params"]

log = logging.getLogger(__name__)

METHODS = ("rank", "l2tv", "l1tv", "rbf")
DEFAULT_ALPHAS = (0.0, 1e-3, 1e-2, 1e-1, 1.0)
DEFAULT_EPSILONS = tuple(2.0 ** k for k in range(-1, 7))


class TuningError(RuntimeError):
    def __init__(self, message, table):
        super().__init__(message)
        self.table = table


@dataclass
class CvConfig:
    """Holdout protocol settings.

    ``alpha_grid`` entries are either one alpha per mode or a single number
    shared by all modes; ``None`` means the shared default grid.
    """

    holdout_fraction: float = 0.25
    alpha_grid: Optional[list] = None
    epsilon_grid: list = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must be in (0, 1)")
        if self.alpha_grid is not None and len(self.alpha_grid) == 0:
            raise ValueError("alpha grid is empty")
        if len(self.epsilon_grid) == 0:
            raise ValueError("epsilon grid is empty")


def holdout_split(samples: SampleSet, fraction: float, seed: int):
    """Random disjoint ``(train, test)`` split with ``round(fraction * p)`` test samples."""
    p = len(samples)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n_test = int(np.floor(fraction * p + 0.5))
    if n_test < 1 or n_test > p - 1:
        raise ValueError(
            f"holdout fraction {fraction} of {p} samples leaves an empty train or test set")
    perm = rng_for(seed, HOLDOUT).permutation(p)
    test = np.sort(perm[:n_test])
    train = np.sort(perm[n_test:])
    return samples.subset(train), samples.subset(test)


def alpha_grid(n_modes: int, values=DEFAULT_ALPHAS, shared: bool = True,
               limit: int = 1024) -> list:
    """Candidate alpha vectors: one shared value, or the per-mode Cartesian product."""
    if shared:
        return [(float(v),) * n_modes for v in values]
    grid = list(itertools.product(*[[float(v) for v in values]] * n_modes))
    if len(grid) > limit:
        raise ValueError(f"per-mode grid has {len(grid)} candidates, limit is {limit}")
    return grid


def candidates(method: str, n_modes: int, cv: CvConfig) -> list:
    if method == "rank":
        return [{}]
    if method in ("l2tv", "l1tv"):
        grid = cv.alpha_grid if cv.alpha_grid is not None else alpha_grid(n_modes)
        out = []
        for a in grid:
            a = (float(a),) * n_modes if np.isscalar(a) else tuple(float(v) for v in a)
            if len(a) != n_modes:
                raise ValueError(f"alpha candidate {a} does not have {n_modes} entries")
            out.append({"alphas": a})
        return out
    if method == "rbf":
        return [{"epsilon": float(e)} for e in cv.epsilon_grid]
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def format_params(params: dict) -> str:
    if "alphas" in params:
        return "alpha=" + ":".join(repr(a) for a in params["alphas"])
    if "epsilon" in params:
        return f"epsilon={params['epsilon']!r}"
    return "-"


def fit_method(method: str, samples: SampleSet, params: dict,
               solver: Optional[SolverConfig] = None, heuristic: bool = True,
               scale=None, axes=None) -> np.ndarray:
    """Reconstruct the full tensor from ``samples`` with one parameter setting."""
    if method == "rbf":
        return reconstruct_rbf(samples, params["epsilon"], scale, axes)
    spec = ProblemSpec(method, params.get("alphas"), heuristic,
                       replace(solver) if solver is not None else SolverConfig())
    estimate, _ = complete(spec, samples)
    return estimate


def grid_search(method: str, samples: SampleSet, cv: CvConfig,
                solver: Optional[SolverConfig] = None, heuristic: bool = True,
                scale=None, axes=None):
    """Score every candidate on a holdout split; return ``(best, table)``.

    ``table`` lists ``(params, nmse_db)`` in grid order (NaN for candidates
    whose fit failed). Ties go to the earliest candidate.
    """
    cands = candidates(method, len(samples.dims), cv)
    train, test = holdout_split(samples, cv.holdout_fraction, cv.seed)
    table = []
    for params in cands:
        try:
            est = fit_method(method, train, params, solver, heuristic, scale, axes)
            score = nmse_db(est, test.adjoint(), test.indices)
        except (DivergenceError, np.linalg.LinAlgError) as exc:
            log.info("candidate %s failed: %s", format_params(params), exc)
            score = float("nan")
        table.append((params, score))
    scores = np.array([s for _, s in table], dtype=float)
    if np.all(np.isnan(scores)):
        raise TuningError(f"every {method} candidate failed", table)
    best = int(np.nanargmin(scores))
    return cands[best], table


def tune_and_fit(method: str, samples: SampleSet, cv: CvConfig,
                 solver: Optional[SolverConfig] = None, heuristic: bool = True,
                 scale=None, axes=None):
    """Grid-search on a holdout split, then refit on all samples.

    Returns ``(estimate, best_params, table)``. A single-candidate grid skips
    the holdout step.
    """
    cands = candidates(method, len(samples.dims), cv)
    if len(cands) == 1:
        best, table = cands[0], [(cands[0], float("nan"))]
    else:
        best, table = grid_search(method, samples, cv, solver, heuristic, scale, axes)
    estimate = fit_method(method, samples, best, solver, heuristic, scale, axes)
    return estimate, best, table
