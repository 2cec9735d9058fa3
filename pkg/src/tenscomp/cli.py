"""Command-line interface: generate, sample, complete, tune, evaluate, sweep, ingest."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import datagen, formats
from .dr import DivergenceError, SolverConfig
from .problems import ProblemSpec, complete, evaluate_unsampled
from .rbf import reconstruct_rbf
from .sweep import run_sweep, write_sweep_csv
from .tuning import METHODS, CvConfig, TuningError, format_params, grid_search

log = logging.getLogger("tenscomp")


class CliError(Exception):
    pass


def parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 30x30x3, got {text!r}") from None
    if not dims or any(n < 1 for n in dims):
        raise argparse.ArgumentTypeError(f"dims must be positive, got {text!r}")
    return dims


def float_list(text: str) -> list:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def int_list(text: str) -> list:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _num(v: float):
    return v if math.isfinite(v) else ("-inf" if v < 0 else ("inf" if v > 0 else "nan"))


def _solver(args) -> SolverConfig:
    return SolverConfig(gamma=args.gamma, step=args.step, max_inner_iters=args.max_iters,
                        inner_tol=args.inner_tol, lambda0=args.lambda0,
                        lambda_factor=args.lambda_factor, max_rounds=args.rounds,
                        outer_tol=args.outer_tol)


def _add_solver_flags(p):
    d = SolverConfig()
    g = p.add_argument_group("solver")
    g.add_argument("--gamma", type=float, default=d.gamma)
    g.add_argument("--step", type=float, default=d.step)
    g.add_argument("--max-iters", type=int, default=d.max_inner_iters)
    g.add_argument("--inner-tol", type=float, default=d.inner_tol)
    g.add_argument("--outer-tol", type=float, default=d.outer_tol)
    g.add_argument("--lambda0", type=float, default=d.lambda0)
    g.add_argument("--lambda-factor", type=float, default=d.lambda_factor)
    g.add_argument("--rounds", type=int, default=d.max_rounds)


def _load_truth(path: str):
    """Tensor file or gridded CSV; returns ``(tensor, scale, axes)``."""
    if path.lower().endswith(".csv"):
        t, axes = formats.ingest_grid_csv(path)
        return t, None, axes
    t, scale = formats.read_tensor_file(path)
    return t, scale, None


def _alphas(text, n_modes):
    vals = float_list(text)
    if len(vals) == 1:
        return vals * n_modes
    if len(vals) != n_modes:
        raise CliError(f"--alpha needs 1 or {n_modes} values, got {len(vals)}")
    return vals


def cmd_generate(args):
    spec = datagen.SyntheticSpec(args.dims, rank=args.rank, smoothness=args.smoothness,
                                 noise_db=args.noise_db, seed=args.seed)
    formats.write_tensor(datagen.synthetic_map(spec), args.out, scale=args.scale)


def cmd_sample(args):
    t = formats.read_tensor(args.tensor)
    s = datagen.make_samples(t, datagen.random_mask(t.shape, args.fraction, args.seed))
    formats.write_samples(s, args.out)
    print(len(s))


def cmd_complete(args):
    samples = formats.read_samples(args.samples)
    n = len(samples.dims)
    params = {}
    if args.params:
        params = json.loads(Path(args.params).read_text())["params"]
    if args.method == "rbf":
        eps = args.epsilon if args.epsilon is not None else params.get("epsilon")
        if eps is None:
            raise CliError("method rbf needs --epsilon or --params")
        est = reconstruct_rbf(samples, eps, scale=args.scale)
        report = f"method: rbf\nepsilon: {eps!r}\n"
    else:
        alphas = None
        if args.method != "rank":
            if args.alpha is not None:
                alphas = _alphas(args.alpha, n)
            elif "alphas" in params:
                alphas = params["alphas"]
            else:
                raise CliError(f"method {args.method} needs --alpha or --params")
        spec = ProblemSpec(args.method, alphas, not args.no_heuristic, _solver(args))
        est, rep = complete(spec, samples)
        report = f"method: {args.method}\nalphas: {alphas}\nheuristic: {spec.heuristic}\n" + rep.to_text()
    formats.write_tensor(est, args.out, scale=args.scale)
    if args.report:
        Path(args.report).write_text(report)


def _grid_spec(text: str, method: str) -> CvConfig:
    p = Path(text)
    raw = p.read_text() if p.exists() else text
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(f"grid spec is neither a readable file nor JSON: {exc}") from None
    if method == "rbf":
        grid = spec.get("epsilons")
        if not grid:
            raise CliError("grid spec has no 'epsilons' candidates")
        return CvConfig(epsilon_grid=[float(e) for e in grid])
    if method == "rank":
        return CvConfig()
    grid = spec.get("alphas")
    if not grid:
        raise CliError("grid spec has no 'alphas' candidates")
    return CvConfig(alpha_grid=grid)


def cmd_tune(args):
    samples = formats.read_samples(args.samples)
    cv = CvConfig() if args.grid_spec is None else _grid_spec(args.grid_spec, args.method)
    cv.seed = args.seed
    cv.holdout_fraction = args.holdout
    best, table = grid_search(args.method, samples, cv, _solver(args),
                              not args.no_heuristic, scale=args.scale)
    out = {
        "method": args.method,
        "params": best,
        "table": [{"params": p, "nmse_db": _num(s)} for p, s in table],
    }
    text = json.dumps(out, indent=2) + "\n"
    if args.out_params:
        Path(args.out_params).write_text(text)
    for p, s in table:
        print(f"{format_params(p)}\t{_num(s)}")
    print(f"best\t{format_params(best)}")


def cmd_evaluate(args):
    est = formats.read_tensor(args.estimate)
    truth, _, _ = _load_truth(args.truth)
    samples = formats.read_samples(args.samples) if args.samples else None
    if samples is None:
        from .samples import SampleSet
        samples = SampleSet.empty(truth.shape)
    v = evaluate_unsampled(est, truth, samples)
    print("-inf" if v == -math.inf else repr(v))


def cmd_sweep(args):
    truth, scale, axes = _load_truth(args.truth)
    if args.scale is not None:
        scale = args.scale
    cv = CvConfig(holdout_fraction=args.holdout)
    if args.alpha_grid is not None:
        cv.alpha_grid = args.alpha_grid
    if args.epsilon_grid is not None:
        cv.epsilon_grid = args.epsilon_grid
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise CliError(f"unknown methods {bad}; expected a subset of {METHODS}")
    rows = run_sweep(truth, args.fractions, args.seeds, methods, cv, _solver(args),
                     not args.no_heuristic, scale, axes, jobs=args.jobs)
    write_sweep_csv(rows, args.out_csv)
    # wall time stays out of stdout so repeated runs print identical text
    for r in rows:
        cells = r.cells()
        print(",".join(cells[:4] + cells[5:]))


def cmd_ingest(args):
    t, axes = formats.ingest_grid_csv(args.csv)
    scale = tuple(float(np.diff(a).mean()) if len(a) > 1 else 1.0 for a in axes)
    formats.write_tensor(t, args.out, scale=scale)
    print("x".join(str(n) for n in t.shape))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tenscomp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic tensor")
    p.add_argument("--dims", type=parse_dims, required=True)
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--smoothness", type=float, default=4.0)
    p.add_argument("--noise-db", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float_list)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="draw a random sample set from a tensor")
    p.add_argument("--tensor", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("complete", help="reconstruct a tensor from samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--alpha", help="one shared value or one per mode, comma separated")
    p.add_argument("--no-heuristic", action="store_true")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--scale", type=float_list)
    p.add_argument("--params", help="parameters file written by 'tune'")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("tune", help="holdout cross-validation over a parameter grid")
    p.add_argument("--samples", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--grid-spec", help='JSON file or string: {"alphas": [...]} or {"epsilons": [...]}')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", type=float, default=0.25)
    p.add_argument("--no-heuristic", action="store_true")
    p.add_argument("--scale", type=float_list)
    p.add_argument("--out-params")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("evaluate", help="NMSE over the positions not in --samples")
    p.add_argument("--estimate", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--samples")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="NMSE for every fraction x seed x method")
    p.add_argument("--truth", required=True, help="tensor file or gridded CSV")
    p.add_argument("--fractions", type=float_list, required=True)
    p.add_argument("--seeds", type=int_list, required=True)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--alpha-grid", type=float_list, help="shared alpha candidates")
    p.add_argument("--epsilon-grid", type=float_list)
    p.add_argument("--holdout", type=float, default=0.25)
    p.add_argument("--no-heuristic", action="store_true")
    p.add_argument("--scale", type=float_list)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-csv", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ingest", help="convert a gridded x,y,height,value CSV to a tensor file")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CliError, ValueError, OSError, DivergenceError, TuningError,
            np.linalg.LinAlgError) as exc:
        print(f"tenscomp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
