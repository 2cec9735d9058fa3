"""Sweep on an externally supplied gridded path-loss CSV (x, y, height, value).

Crops the grid if asked, uses the grid spacing as RBF coordinates and writes
the per-cell CSV::

    python3 scripts/dataset_sweep.py pathloss.csv --crop 0:384,0:549,: --out real.csv
"""
import argparse
from dataclasses import dataclass, field

from tenscomp.dr import SolverConfig
from tenscomp.formats import ingest_grid_csv
from tenscomp.sweep import run_sweep, write_sweep_csv
from tenscomp.tuning import METHODS, CvConfig

from run_sweep import summarize


@dataclass
class DatasetConfig:
    fractions: tuple = (0.02, 0.05, 0.1, 0.2)
    seeds: tuple = (1,)
    methods: tuple = METHODS
    alpha_grid: tuple = (0.01, 0.1, 1.0)
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(gamma=10.0))
    jobs: int = 1


def parse_crop(text):
    if not text:
        return None
    # inclusive coordinate ranges; ":" leaves an axis uncropped
    out = []
    for part in text.split(","):
        lo, hi = part.split(":")
        out.append(None if not lo and not hi else
                   (float(lo) if lo else -float("inf"), float(hi) if hi else float("inf")))
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("csv")
    p.add_argument("--crop", help="lo:hi coordinate range per axis, comma separated")
    p.add_argument("--seeds", default="1")
    p.add_argument("--fractions", default="0.02,0.05,0.1,0.2")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="dataset_sweep.csv")
    a = p.parse_args()
    cfg = DatasetConfig(fractions=tuple(float(f) for f in a.fractions.split(",")),
                        seeds=tuple(int(s) for s in a.seeds.split(",")), jobs=a.jobs)
    truth, axes = ingest_grid_csv(a.csv, crop=parse_crop(a.crop))
    print("tensor", "x".join(map(str, truth.shape)))
    rows = run_sweep(truth, cfg.fractions, cfg.seeds, cfg.methods,
                     CvConfig(alpha_grid=list(cfg.alpha_grid)), cfg.solver,
                     axes=axes, jobs=cfg.jobs)
    write_sweep_csv(rows, a.out)
    print(summarize(rows, cfg.methods))


if __name__ == "__main__":
    main()
