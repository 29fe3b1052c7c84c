"""
Command line entry point: ``python -m obcs <command>``.

    gen                 write a random instance (matrix, signs, signal)
    recover             run one recovery and print JSON lines
    bench               accuracy | consistency | speed sweeps to CSV
    first-index         success rate of the first index against m
    expectation-check   Monte-Carlo check of E[a_j sign(a^T x)]

Exit codes: 0 success, 2 invalid input or configuration, 3 numeric failure.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from obcs import files
from obcs.config import BENCH_KINDS, KNOWN_ALGORITHMS, ExperimentConfig, desk_config, load_experiment_config
from obcs.errors import (
    DegenerateMeasurementError,
    ObcsError,
    PivotDegenerateError,
    SolverNumericError,
    StagnationError,
)
from obcs.harness import SWEEPS, first_index_trend, run_algorithm, run_first_index_study
from obcs.metrics import evaluate
from obcs.model import MeasurementEnsemble, SparseSignal, generate_instance
from obcs.oracle import estimate_expectation
from obcs.reduction import certify_solution

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3
_NUMERIC_ERRORS = (DegenerateMeasurementError, PivotDegenerateError, SolverNumericError, StagnationError)
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_M_LIST = "30,50,70,90,110,130,150,170,200"


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _json_value(value):
    """JSON-safe scalar; infinities become the strings 'inf' / '-inf' like the CSV."""
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value) or math.isnan(value):
            return str(value)
    return value


def _emit(record, out):
    out.write(json.dumps({k: _json_value(v) for k, v in record.items()}) + "\n")


def cmd_gen(args):
    signal, ensemble = generate_instance(args.m, args.n, args.s, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files.write_matrix(out / f"{args.prefix}.matrix.txt", ensemble.A)
    files.write_signs(out / f"{args.prefix}.signs.txt", ensemble.y)
    files.write_signal(out / f"{args.prefix}.signal.txt", signal)
    print(f"wrote {args.prefix}.{{matrix,signs,signal}}.txt to {out} (seed {args.seed})")
    return EXIT_OK


def _load_problem(args):
    """(ensemble, truth or None) from files or from a replayed trial seed."""
    if args.seed is not None:
        if args.m is None or args.n is None:
            raise argparse.ArgumentTypeError("--seed replays a trial and needs --m and --n")
        signal, ensemble = generate_instance(args.m, args.n, args.s, args.seed)
        return ensemble, signal
    if args.matrix is None or args.signs is None:
        raise argparse.ArgumentTypeError("give --matrix and --signs, or --seed with --m and --n")
    ensemble = MeasurementEnsemble(A=files.read_matrix(args.matrix), y=files.read_signs(args.signs))
    truth = files.read_signal(args.signal) if args.signal else None
    return ensemble, truth


def cmd_recover(args):
    ensemble, truth = _load_problem(args)
    A, y = ensemble.A, ensemble.y
    cfg = ExperimentConfig(n=A.shape[1], sweep_values=(1.0,), s=args.s, c0=args.c0, epsilon=args.eps,
                           atoms_per_iteration=args.atoms, algorithms=(args.algo,))
    result = run_algorithm(args.algo, A, y, args.s, cfg)
    cert = certify_solution(result.x_raw, A, y, s=args.s, c0=args.c0)
    out = sys.stdout
    for step in result.trace:
        _emit({"type": "step", "iteration": step.iteration,
               "indices": [i + 1 for i in step.indices], "residual": step.residual}, out)
    _emit({
        "type": "result",
        "algorithm": result.algorithm,
        "j0": None if result.j0 is None else result.j0 + 1,
        "support": [i + 1 for i in result.support],
        "x_unit": {str(i + 1): float(result.x_unit[i]) for i in result.support},
        "iterations": result.iterations,
        "final_residual": result.final_residual,
        "converged": result.converged,
        "stop_reason": result.stop_reason,
        "wall_time": result.wall_time,
    }, out)
    _emit({
        "type": "certificate",
        "consistent": cert.consistent,
        "hamming_mismatches": cert.hamming_mismatches,
        "sparsity": cert.sparsity,
        "l1_of_Ax": cert.l1_of_Ax,
        "y_dot_Ax": cert.y_dot_Ax,
    }, out)
    if truth is not None:
        record = evaluate(result, truth, ensemble, trial_seed=args.seed or 0)
        _emit({"type": "metrics", **record.to_row()}, out)
    return EXIT_OK


def cmd_bench(args):
    cfg = load_experiment_config(args.config, desk_config(args.kind)) if args.config else desk_config(args.kind)
    if args.paper_scale:
        cfg = cfg.paper_scale()
    cfg = cfg.with_overrides(workers=args.workers, output_path=args.output, trials=args.trials,
                             base_seed=args.seed)
    rows, summary = SWEEPS[args.kind](cfg, timing=not args.no_timing, xlsx=args.xlsx)
    print(summary.to_string(index=False))
    failed = int((rows["status"] != "ok").sum())
    if failed:
        logger.warning("%d of %d rows recorded an error", failed, len(rows))
    return EXIT_OK


def cmd_first_index(args):
    study = run_first_index_study(args.n, args.s, args.m_list, args.trials, args.seed)
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        study.to_csv(args.output, index=False)
    print(study.to_string(index=False))
    print(f"spearman(rate, m) = {first_index_trend(study):.3f}")
    return EXIT_OK


def cmd_expectation_check(args):
    if not 1 <= args.j <= args.n:
        raise argparse.ArgumentTypeError(f"--j must lie in [1, {args.n}]")
    values = np.zeros(args.n)
    values[0] = 1.0
    estimate = estimate_expectation(SparseSignal.from_vector(values), args.j - 1, args.trials, args.seed)
    gap = abs(estimate.mean - estimate.theoretical)
    print(f"mean        {estimate.mean:.6f}")
    print(f"theoretical {estimate.theoretical:.6f}")
    print(f"stderr      {estimate.stderr:.2e}  (z = {estimate.z_score:.2f})")
    print(f"within {args.tolerance:g}: {'yes' if gap <= args.tolerance else 'no'}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="obcs", description="One-bit compressed sensing by STrMP")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="instance")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("recover", help="recover a signal from sign measurements")
    p.add_argument("--algo", choices=KNOWN_ALGORITHMS, default="strmp")
    p.add_argument("--matrix")
    p.add_argument("--signs")
    p.add_argument("--signal", help="optional ground truth for metrics")
    p.add_argument("--seed", type=int, help="replay the instance of a trial_seed from a results CSV")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--atoms", type=int, default=1, help="atoms added per iteration")
    p.set_defaults(handler=cmd_recover)

    p = sub.add_parser("bench", help="run a benchmark sweep")
    p.add_argument("kind", choices=BENCH_KINDS)
    p.add_argument("--config", help="key = value file; built-in desk config when omitted")
    p.add_argument("--workers", type=int)
    p.add_argument("--output")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--paper-scale", action="store_true", help="n = 1000, full grid, 100 trials")
    p.add_argument("--no-timing", action="store_true", help="write wall_time as 0")
    p.add_argument("--xlsx", action="store_true", help="also write an Excel workbook")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("first-index", help="first-index success rate against m")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--s", type=int, default=15)
    p.add_argument("--m-list", type=_int_list, default=_int_list(DEFAULT_M_LIST))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(handler=cmd_first_index)

    p = sub.add_parser("expectation-check", help="Monte-Carlo check of E[a_j sign(a^T e_1)]")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--j", type=int, default=1, help="1-based coordinate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=0.005)
    p.set_defaults(handler=cmd_expectation_check)
    return parser


def configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except _NUMERIC_ERRORS as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERIC
    except (ObcsError, OSError, argparse.ArgumentTypeError, ValueError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_INVALID
