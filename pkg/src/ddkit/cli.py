"""Command-line entry points: reduce, check-minimal, verify-theory, bench, gen."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import load_manifest, pvalues_csv, results_csv, run_matrix
from .core import Granularity, reassemble, segment
from .fixpoint import ALGORITHMS, fixpoint_reduce, run_algorithm
from .oracle import (
    ExternalOracle,
    ExternalOracleConfig,
    OracleUnavailableError,
    PreconditionError,
    QueryCache,
    check_one_minimal,
)
from .probdd import TIE_LARGER, TIE_STRICT
from .telemetry import TelemetrySink
from .theory import GROWTH_FACTOR, GROWTH_FACTOR_ROUNDED, bound_check, schedule

LOG = logging.getLogger("ddkit")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_ORACLE_UNAVAILABLE = 3
EXIT_NOT_MINIMAL = 4

REPORT_SCHEMA = 1


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def probability(text: str) -> float:
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError(f"p0 must be in the open interval (0, 1), got {p:g}")
    return p


def positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, type=Path, help="file to reduce")
    p.add_argument("--oracle", required=True, help="interestingness command; exit 0 = property holds")
    p.add_argument("--granularity", choices=[g.value for g in Granularity], default="line")
    p.add_argument("--timeout", type=positive_float, default=300.0, help="seconds per query")
    p.add_argument("--candidate-name", help="file name the candidate is written as (default: input name)")
    p.add_argument("--keep-logs", type=Path, metavar="DIR", help="store each query's stdout/stderr")


def _make_oracle(args) -> ExternalOracle:
    return ExternalOracle(
        ExternalOracleConfig(
            args.oracle,
            args.candidate_name or args.input.name,
            args.timeout,
            args.keep_logs,
        )
    )


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ddkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("reduce", help="minimize an input against an interestingness test")
    _oracle_args(p)
    p.add_argument("--alg", choices=ALGORITHMS, default="cdd")
    p.add_argument("--p0", type=probability, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixpoint", action="store_true", help="rerun until the size stops shrinking")
    p.add_argument("--max-iterations", type=positive_int, default=10)
    p.add_argument("--max-queries", type=positive_int)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--probdd-tie", choices=[TIE_STRICT, TIE_LARGER], default=TIE_STRICT)
    p.add_argument("--check-minimal", action="store_true", help="test 1-minimality of the result")
    p.add_argument("--output", type=Path, help="reduced file (default: <input>.reduced)")
    p.add_argument("--telemetry", type=Path, help="write per-query telemetry JSON here")
    p.add_argument("--telemetry-csv", type=Path, help="write per-query telemetry CSV here")
    p.add_argument("--report", type=Path, help="write the summary JSON here (default: stdout)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("check-minimal", help="check that no single element can be removed")
    _oracle_args(p)
    p.set_defaults(func=cmd_check_minimal)

    p = sub.add_parser("verify-theory", help="size schedule and bound checks for a p0")
    p.add_argument("--p0", type=probability, required=True)
    p.add_argument("--growth", choices=["exact", "rounded"], default="exact")
    p.add_argument("--output", type=Path, help="schedule CSV (default: stdout)")
    p.add_argument("--bounds-csv", type=Path, help="also sweep every integer size in [2, --s-max]")
    p.add_argument("--s-max", type=positive_int, default=100_000)
    p.add_argument("--plot", type=Path, help="render the bounds figure to this file")
    p.set_defaults(func=cmd_verify_theory)

    p = sub.add_parser("bench", help="run a benchmark manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a planted input file and its oracle script")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--n", type=positive_int, default=64)
    p.add_argument("--k", type=positive_int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)
    return parser


def cmd_reduce(args) -> int:
    elements = segment(args.input.read_bytes(), args.granularity)
    oracle = _make_oracle(args)
    cache = None if args.no_cache else QueryCache()
    sink = TelemetrySink(args.alg, str(args.input))
    params = dict(
        p0=args.p0,
        seed=args.seed,
        tie=args.probdd_tie,
        sink=sink,
        cache=cache,
        max_queries=args.max_queries,
    )
    if args.fixpoint:
        out = fixpoint_reduce(args.alg, elements, oracle, args.max_iterations, **params)
    else:
        out = run_algorithm(args.alg, elements, oracle, **params)

    output = args.output or args.input.with_name(args.input.name + ".reduced")
    output.write_bytes(reassemble(out.final))
    report = {"schema": REPORT_SCHEMA, "input": str(args.input), "output": str(output)}
    report.update(out.summary())
    report["p0"] = args.p0 if args.alg != "ddmin" else None
    report["seed"] = args.seed
    report["spawns"] = oracle.spawns
    report["timeouts"] = oracle.timeouts
    report["query_stats"] = sink.stats().to_dict()
    if args.check_minimal:
        minimal = check_one_minimal(out.final, oracle, cache)
        report["one_minimal"] = minimal.is_one_minimal
        report["removable_ids"] = sorted(minimal.removable_ids)
        report["spawns"] = oracle.spawns
    if args.telemetry:
        sink.write_json(args.telemetry)
    if args.telemetry_csv:
        args.telemetry_csv.write_text(sink.to_csv())
    text = json.dumps(report, indent=1) + "\n"
    if args.report:
        args.report.write_text(text)
    else:
        sys.stdout.write(text)
    LOG.info("%d -> %d elements in %d queries", len(elements), len(out.final), out.oracle_invocations)
    return EXIT_OK


def cmd_check_minimal(args) -> int:
    elements = segment(args.input.read_bytes(), args.granularity)
    report = check_one_minimal(elements, _make_oracle(args), QueryCache())
    by_id = {e.id: e for e in elements}
    for i in sorted(report.removable_ids):
        print(f"removable\t{i}\t{by_id[i].payload!r}")
    if report.is_one_minimal:
        print(f"1-minimal: {len(elements)} elements")
        return EXIT_OK
    print(f"not 1-minimal: {len(report.removable_ids)} of {len(elements)} elements removable")
    return EXIT_NOT_MINIMAL


def _num(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def cmd_verify_theory(args) -> int:
    growth = GROWTH_FACTOR if args.growth == "exact" else GROWTH_FACTOR_ROUNDED
    rows = schedule(args.p0, growth)
    ok = all(r.holds is not False for r in rows)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["r", "p_r", "s_r", "real_s_r", "real_s_next", "lower", "upper", "holds"])
        for r in rows:
            w.writerow(
                [r.round, _num(r.prob), r.size, _num(r.real_size), _num(r.next_real_size),
                 _num(r.lower), _num(r.upper), "" if r.holds is None else str(r.holds).lower()]
            )
    finally:
        if args.output:
            out.close()
    if args.bounds_csv:
        with open(args.bounds_csv, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["s", "lower", "value", "upper", "holds"])
            for s in range(2, args.s_max + 1):
                b = bound_check(s)
                ok &= b.holds
                w.writerow([s, repr(b.lower), repr(b.value), repr(b.upper), str(b.holds).lower()])
    if args.plot:
        from .plotting import plot_bounds

        plot_bounds(args.plot, s_max=args.s_max)
    if not ok:
        print("bound check failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_USAGE


def cmd_bench(args) -> int:
    manifest = load_manifest(args.manifest)
    result = run_matrix(manifest, args.out)
    if not args.no_figures:
        from .plotting import plot_query_categories, plot_query_counts

        plot_query_categories(result.stats_by_algorithm(), args.out / "queries_by_category.png")
        plot_query_counts(result.rows, manifest.algorithms, args.out / "query_counts.png")
    sys.stdout.write(results_csv(result))
    sys.stdout.write(pvalues_csv(result))
    return EXIT_OK


def cmd_gen(args) -> int:
    from .synthetic import write_planted_pair

    if args.k > args.n:
        print(f"--k ({args.k}) must not exceed --n ({args.n})", file=sys.stderr)
        return EXIT_USAGE
    input_path, script, kernel = write_planted_pair(args.out, args.n, args.k, args.seed)
    print(json.dumps({"input": str(input_path), "oracle": str(script), "kernel": sorted(kernel)}))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"ddkit: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OracleUnavailableError as exc:
        print(f"ddkit: {exc}", file=sys.stderr)
        return EXIT_ORACLE_UNAVAILABLE
    except (OSError, ValueError) as exc:
        print(f"ddkit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
