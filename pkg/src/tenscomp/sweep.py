"""Sampling-fraction sweep: sample, tune, reconstruct and score every method."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .datagen import make_samples, random_mask
from .dr import SolverConfig
from .formats import format_number
from .problems import evaluate_unsampled
from .tuning import CvConfig, format_params, tune_and_fit

__all__ = ["SweepRow", "CSV_HEADER", "run_cell", "run_sweep", "write_sweep_csv",
           "read_sweep_csv"]

CSV_HEADER = ("fraction", "seed", "method", "nmse_db", "wall_time_s", "params")


@dataclass
class SweepRow:
    fraction: float
    seed: int
    method: str
    nmse_db: float
    wall_time_s: float
    params: str

    def cells(self) -> list:
        return [format_number(self.fraction), str(self.seed), self.method,
                _fmt_db(self.nmse_db), f"{self.wall_time_s:.3f}", self.params]


def _fmt_db(v: float) -> str:
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return format_number(v)


def run_cell(truth: np.ndarray, fraction: float, seed: int, method: str,
             cv: CvConfig, solver: Optional[SolverConfig] = None,
             heuristic: bool = True, scale=None, axes=None) -> SweepRow:
    """One sweep cell; the holdout split uses the cell's seed."""
    t0 = time.perf_counter()
    samples = make_samples(truth, random_mask(truth.shape, fraction, seed))
    estimate, best, _ = tune_and_fit(method, samples, replace(cv, seed=seed), solver,
                                     heuristic, scale, axes)
    score = evaluate_unsampled(estimate, truth, samples)
    return SweepRow(float(fraction), int(seed), method, score,
                    time.perf_counter() - t0, format_params(best))


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(truth: np.ndarray, fractions, seeds, methods, cv: Optional[CvConfig] = None,
              solver: Optional[SolverConfig] = None, heuristic: bool = True,
              scale=None, axes=None, jobs: int = 1) -> list:
    """Rows in (fraction, seed, method) order, independent of ``jobs``."""
    cv = cv or CvConfig()
    cells = [(truth, float(f), int(s), m, cv, solver, heuristic, scale, axes)
             for f in fractions for s in seeds for m in methods]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell_args, cells))
    return [_run_cell_args(c) for c in cells]


def write_sweep_csv(rows, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.cells())


def read_sweep_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected sweep header {header}")
        return [SweepRow(float(f), int(s), m, float(n), float(t), p)
                for f, s, m, n, t, p in reader]
