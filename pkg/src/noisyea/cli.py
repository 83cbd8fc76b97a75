"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 the analysis is
well-posed but infeasible or degenerate (infeasible bound, no admissible
q, zero-variance t-test, chain that cannot reach the optimum).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bitcore import ConfigurationError, MutationKind, MutationOp, NoiseKind, NoiseModel
from .bounds import bound_bitwise, max_q_for_chi, one_bit_report
from .ea import EvaluationPolicy, run_trial
from .exp import (
    PARALLELISM_ENV,
    ExperimentConfig,
    ReportError,
    ReportKind,
    default_parallelism,
    emit_report,
    load_batch,
    run_batch,
    save_batch,
    write_report_csv,
)
from .oracle import CapacityError, ChainSpec, SingularChainError, exact_expected_runtime
from .stats import DegenerateSampleError, welch_t_test

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGENERATE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, out) -> None:
    json.dump(obj, out, indent=2, sort_keys=True)
    out.write("\n")


def _models(args) -> tuple[MutationOp, NoiseModel]:
    mutation = MutationKind(args.mutation)
    if mutation is MutationKind.STANDARD:
        if args.chi is None:
            raise UsageError("--chi is required for standard mutation")
        mut_op = MutationOp.standard(args.chi)
    else:
        if args.chi is not None:
            raise UsageError("--chi only applies to standard mutation")
        mut_op = MutationOp.one_bit()
    return mut_op, NoiseModel(NoiseKind(args.noise), args.q)


def _params(args, mut_op: MutationOp, noise: NoiseModel) -> dict:
    return {
        "mutation": mut_op.kind.value,
        "chi": mut_op.chi if mut_op.kind is MutationKind.STANDARD else None,
        "noise": noise.kind.value,
        "q": noise.q,
    }


def cmd_run(args, out) -> int:
    mut_op, noise = _models(args)
    budget = int(math.floor(args.budget_mult * args.n * args.n))
    result = run_trial(args.n, mut_op, noise, EvaluationPolicy(args.policy), budget, args.seed)
    _emit(result.to_dict(), out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    config = ExperimentConfig.load(args.config)
    parallelism = args.parallelism if args.parallelism is not None else default_parallelism()
    result = run_batch(config, parallelism)
    csv_path, json_path = save_batch(result, args.out_dir)
    summary = {
        "csv": str(csv_path),
        "manifest": str(json_path),
        "sizes": [
            {
                "n": n,
                "q": sr.q,
                "budget": sr.budget,
                "count": len(sr.trials),
                "completed_count": sr.completed_count,
                "fitness_mean": sr.fitness.mean,
                "runtime_mean": None if sr.runtime is None else sr.runtime.mean,
            }
            for n, sr in result.sizes.items()
        ],
    }
    _emit(summary, out)
    return EXIT_OK


def cmd_bound(args, out) -> int:
    if args.theorem == 1:
        if args.chi is not None:
            raise UsageError("--chi does not apply to --theorem 1")
        if not 0 <= args.q <= 1:
            raise UsageError(f"one-bit noise needs 0 <= q <= 1, got {args.q}")
        report = one_bit_report(args.n, args.q)
    else:
        if args.chi is None:
            raise UsageError("--theorem 2 requires --chi")
        if args.chi <= 0 or args.q < 0:
            raise UsageError("--theorem 2 needs chi > 0 and q >= 0")
        report = bound_bitwise(args.n, args.chi, args.q, args.c)
    _emit(report.to_dict(), out)
    return EXIT_OK if report.feasible else EXIT_DEGENERATE


def cmd_maxq(args, out) -> int:
    if args.chi <= 0 or args.tol <= 0:
        raise UsageError("--chi and --tol must be positive")
    q, found = max_q_for_chi(args.chi, args.tol)
    _emit({"chi": args.chi, "tol": args.tol, "max_q": q, "found": found}, out)
    return EXIT_OK if found else EXIT_DEGENERATE


def cmd_oracle(args, out) -> int:
    mut_op, noise = _models(args)
    sol = exact_expected_runtime(ChainSpec(args.n, mut_op, noise))
    _emit({
        "n": args.n,
        "params": _params(args, mut_op, noise) | {"policy": "ignore"},
        "expected_runtime": sol.expected_runtime,
        "residual_norm": sol.residual_norm,
        "n_states": sol.n_states,
    }, out)
    return EXIT_OK


def read_sample(path: str, column: Optional[str] = None, n: Optional[int] = None) -> list[float]:
    """Values from a CSV file: one number per row, or a named column of a headed file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise UsageError(f"{path}: empty sample file")
    try:
        float(rows[0][0])
        header = None
    except ValueError:
        header, rows = rows[0], rows[1:]
    if header is None:
        if column is not None or n is not None:
            raise UsageError(f"{path}: --column/--n need a header row")
        idx = 0
    elif column is not None:
        if column not in header:
            raise UsageError(f"{path}: no column {column!r} in header {header}")
        idx = header.index(column)
    elif len(header) == 1:
        idx = 0
    else:
        raise UsageError(f"{path}: several columns, choose one with --column")
    if n is not None:
        if header is None or "n" not in header:
            raise UsageError(f"{path}: --n needs an 'n' column")
        ni = header.index("n")
        rows = [r for r in rows if int(r[ni]) == n]
    try:
        return [float(r[idx]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise UsageError(f"{path}: malformed value ({exc})") from None


def cmd_ttest(args, out) -> int:
    if args.matrix:
        if not args.inputs or args.a or args.b:
            raise UsageError("--matrix takes --inputs and no --a/--b")
        labels = args.labels or [Path(p).stem for p in args.inputs]
        if len(labels) != len(args.inputs):
            raise UsageError("--labels must match --inputs in length")
        samples = [read_sample(p, args.column, args.n) for p in args.inputs]
        w = csv.writer(out, lineterminator="\n")
        w.writerow([""] + labels)
        for la, a in zip(labels, samples):
            cells = []
            for b in samples:
                try:
                    cells.append(repr(welch_t_test(a, b).p_value))
                except DegenerateSampleError:
                    cells.append("degenerate")
            w.writerow([la] + cells)
        return EXIT_OK
    if args.inputs or not (args.a and args.b):
        raise UsageError("give --a and --b, or --matrix with --inputs")
    a = read_sample(args.a, args.column, args.n)
    b = read_sample(args.b, args.column, args.n)
    try:
        report = welch_t_test(a, b)
    except DegenerateSampleError as exc:
        print(f"degenerate samples: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    _emit(report.to_dict(), out)
    return EXIT_OK


def cmd_report(args, out) -> int:
    kind = ReportKind(args.kind)
    batches = [load_batch(p) for p in args.inputs]
    rows = emit_report(batches, kind, allow_partial=args.allow_partial)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_report_csv(rows, fh)
    else:
        write_report_csv(rows, out)
    if args.figure:
        from .plotting import plot_report

        plot_report(rows, kind, args.figure)
    return EXIT_OK


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", choices=[k.value for k in NoiseKind], required=True)
    p.add_argument("--q", type=float, required=True, help="noise strength (always explicit)")
    p.add_argument("--mutation", choices=[k.value for k in MutationKind], required=True)
    p.add_argument("--chi", type=float, help="mutation strength, standard mutation only")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisyea", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one seeded trial")
    _model_flags(p)
    p.add_argument("--policy", choices=[k.value for k in EvaluationPolicy], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--budget-mult", type=float, default=100.0, help="budget = floor(mult * n^2)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run an experiment config and write trial CSV + manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--parallelism", type=int, help=f"worker threads (default ${PARALLELISM_ENV} or 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bound", help="evaluate a closed-form runtime bound")
    p.add_argument("--theorem", type=int, choices=(1, 2), required=True,
                   help="1: one-bit mutation and noise; 2: standard mutation, bitwise noise")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--chi", type=float)
    p.add_argument("--c", type=float, help="evaluate at this c instead of the largest admissible")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("maxq", help="largest bitwise noise strength with an admissible c")
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_maxq)

    p = sub.add_parser("oracle", help="exact expected runtime for small n (IGNORE policy)")
    _model_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("ttest", help="Welch's t-test between samples")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--matrix", action="store_true", help="all pairs of --inputs as a CSV table")
    p.add_argument("--inputs", nargs="+")
    p.add_argument("--labels", nargs="+")
    p.add_argument("--column", help="column to read from headed CSV files")
    p.add_argument("--n", type=int, help="keep only rows with this problem size")
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("report", help="figure-ready CSV from saved sweeps")
    p.add_argument("--kind", choices=[k.value for k in ReportKind], required=True)
    p.add_argument("--inputs", nargs="+", required=True, help="trial CSV files written by sweep")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--figure", help="also render an error-bar figure to this path")
    p.add_argument("--allow-partial", action="store_true",
                   help="keep runtime points where only some runs completed")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, ConfigurationError, CapacityError, ReportError, ValueError) as exc:
        print(f"noisyea {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularChainError as exc:
        print(f"noisyea {args.command}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"noisyea {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
