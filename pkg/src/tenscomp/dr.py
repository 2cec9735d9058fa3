"""Douglas-Rachford splitting on the M-fold product space with lambda continuation.

The iterate is a stack of M tensors of equal dims (shape ``(M, *dims)``).
One step reads::

    p = consensus_mean(x)                       # prox of the consensus indicator
    x <- x + step * (prox_f(2p - x) - p)        # prox_f acts blockwise

and the reconstruction is the consensus mean of the final iterate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .prox import consensus_mean

__all__ = ["SolverConfig", "RoundRecord", "SolverReport", "DivergenceError",
           "dr_step", "solve", "product_norm"]

log = logging.getLogger(__name__)

Prox = Callable[..., np.ndarray]


class DivergenceError(FloatingPointError):
    def __init__(self, round_index: int, iteration: int):
        super().__init__(
            f"non-finite iterate in round {round_index}, iteration {iteration}")
        self.round_index = round_index
        self.iteration = iteration


@dataclass
class SolverConfig:
    gamma: float = 1.0
    step: float = 1.0
    max_inner_iters: int = 500
    inner_tol: float = 1e-6
    lambda0: float = 0.1
    lambda_factor: float = 10.0
    max_rounds: int = 6
    outer_tol: float = 1e-4

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if not 0 < self.step <= 2:
            raise ValueError("step must be in (0, 2]")
        if self.max_inner_iters < 1 or self.max_rounds < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.lambda0 <= 0 or self.lambda_factor <= 1:
            raise ValueError("need lambda0 > 0 and lambda_factor > 1")

    def lambdas(self):
        return [self.lambda0 * self.lambda_factor ** r for r in range(self.max_rounds)]


@dataclass
class RoundRecord:
    lam: Optional[float]
    iterations: int
    residual: float
    misfit: float
    objective: float
    consensus_gap: float
    residual_history: list = field(default_factory=list, repr=False)


@dataclass
class SolverReport:
    rounds: list = field(default_factory=list)
    termination: str = ""

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.rounds)

    def to_text(self) -> str:
        lines = [f"termination: {self.termination}",
                 "round lambda iterations residual misfit objective consensus_gap"]
        for i, r in enumerate(self.rounds):
            lam = "-" if r.lam is None else repr(r.lam)
            lines.append(f"{i} {lam} {r.iterations} {r.residual!r} {r.misfit!r} "
                         f"{r.objective!r} {r.consensus_gap!r}")
        return "\n".join(lines) + "\n"


def product_norm(x: np.ndarray) -> float:
    """Norm of a stacked iterate under the averaged product inner product."""
    return float(np.sqrt(np.dot(x.ravel(), x.ravel()) / x.shape[0]))


def _apply(prox: Prox, z: np.ndarray, gamma: float, lam):
    return prox(z, gamma) if lam is None else prox(z, gamma, lam)


def dr_step(state: np.ndarray, proxes: Sequence[Prox], gamma: float, step: float,
            lam=None, lambda_index: Optional[int] = None) -> np.ndarray:
    """One Douglas-Rachford step; returns a new stacked state."""
    state = np.asarray(state, dtype=float)
    if len(proxes) != state.shape[0]:
        raise ValueError(f"{len(proxes)} operators for {state.shape[0]} blocks")
    p = consensus_mean(state)
    r = 2.0 * p - state
    out = np.empty_like(state)
    for i, prox in enumerate(proxes):
        q = _apply(prox, r[i], gamma, lam if i == lambda_index else None)
        out[i] = state[i] + step * (q - p)
    return out


def solve(proxes: Sequence[Prox], init: np.ndarray, config: SolverConfig,
          lambda_index: Optional[int] = None,
          misfit: Optional[Callable[[np.ndarray], float]] = None,
          objective: Optional[Callable[[np.ndarray, float], float]] = None):
    """Run DR with lambda continuation; return ``(reconstruction, report)``.

    ``proxes[i]`` is called as ``prox(z, gamma)``, except ``proxes[lambda_index]``
    which is called as ``prox(z, gamma, lam)`` with the scheduled lambda.
    Every block starts at ``init``. Without a ``lambda_index`` a single round
    is run.
    """
    if not proxes:
        raise ValueError("need at least one proximal operator")
    if lambda_index is not None and not 0 <= lambda_index < len(proxes):
        raise ValueError(f"lambda_index {lambda_index} out of range")
    init = np.asarray(init, dtype=float)
    m = len(proxes)
    state = np.broadcast_to(init, (m,) + init.shape).copy()
    lambdas = [None] if lambda_index is None else config.lambdas()
    report = SolverReport()
    previous = None
    x = consensus_mean(state)

    for rnd, lam in enumerate(lambdas):
        history = []
        residual = np.inf
        it = 0
        diff = np.zeros_like(state)
        while it < config.max_inner_iters:
            new = dr_step(state, proxes, config.gamma, config.step, lam, lambda_index)
            it += 1
            if not np.all(np.isfinite(new)):
                raise DivergenceError(rnd, it)
            diff = new - state
            residual = product_norm(diff) / max(1.0, product_norm(state))
            history.append(residual)
            state = new
            if residual < config.inner_tol:
                break
        x = consensus_mean(state)
        # distance of the blockwise prox outputs from their consensus, from the last step
        gap = max(np.linalg.norm(d) for d in diff) / config.step / max(1.0, float(np.linalg.norm(x)))
        report.rounds.append(RoundRecord(
            lam=lam,
            iterations=it,
            residual=float(residual),
            misfit=float(misfit(x)) if misfit else float("nan"),
            objective=float(objective(x, lam)) if objective else float("nan"),
            consensus_gap=float(gap),
            residual_history=history,
        ))
        log.debug("round %d lambda=%s iters=%d residual=%.3g", rnd, lam, it, residual)
        if previous is not None:
            change = np.linalg.norm(x - previous) / max(np.linalg.norm(previous), np.finfo(float).tiny)
            if change < config.outer_tol:
                report.termination = "outer_tol"
                return x, report
        previous = x
    report.termination = "max_rounds" if lambda_index is not None else "single_round"
    return x, report
