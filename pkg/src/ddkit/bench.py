"""Run algorithm x benchmark x repetition matrices and compare the algorithms."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .core import ElementList, Granularity, segment
from .fixpoint import ALGORITHMS, fixpoint_reduce, run_algorithm
from .oracle import (
    ExternalOracle,
    ExternalOracleConfig,
    PropertyOracle,
    QueryCache,
    ReductionError,
    planted_oracle,
)
from .probdd import TIE_STRICT
from .synthetic import gen_planted
from .telemetry import RunStats, TelemetrySink

LOG = logging.getLogger(__name__)

MIN_WILCOXON_PAIRS = 6
METRICS = ("final_size", "time", "queries")


def geometric_mean(xs: Sequence[float]) -> float:
    xs = list(xs)
    if not xs:
        raise ValueError("geometric mean of an empty sequence")
    if any(not x > 0 for x in xs):
        raise ValueError("geometric mean needs strictly positive values")
    return statistics.geometric_mean(xs)


def _rank_abs(values: Sequence[float]) -> tuple[list[float], list[int]]:
    """Average ranks of ``values`` (1-based) and the sizes of the tie groups."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    ties = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int
    z: float


def wilcoxon_signed_rank(xs: Sequence[float], ys: Sequence[float]) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test, normal approximation.

    Zero differences are dropped; the variance is tie-corrected and no
    continuity correction is applied. The statistic is min(W+, W-).
    """
    if len(xs) != len(ys):
        raise ValueError(f"paired samples differ in length: {len(xs)} vs {len(ys)}")
    diffs = [x - y for x, y in zip(xs, ys) if x != y]
    n = len(diffs)
    if n < MIN_WILCOXON_PAIRS:
        raise ValueError(
            f"only {n} nonzero paired differences; the normal approximation needs "
            f">= {MIN_WILCOXON_PAIRS} (exact small-sample tables are not supported)"
        )
    ranks, ties = _rank_abs([abs(d) for d in diffs])
    w_plus = math.fsum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = math.fsum(r for r, d in zip(ranks, diffs) if d < 0)
    t = min(w_plus, w_minus)
    mean = n * (n + 1) / 4
    var = n * (n + 1) * (2 * n + 1) / 24 - sum(g**3 - g for g in ties) / 48
    z = (t - mean) / math.sqrt(var)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
    return WilcoxonResult(t, p, n, z)


@dataclass
class Benchmark:
    name: str
    load: Callable[[], ElementList]
    make_oracle: Callable[[], PropertyOracle]
    p0: float = 0.1

    @classmethod
    def from_files(
        cls,
        name: str,
        input_path: str | Path,
        oracle_cmd: str | Sequence[str],
        granularity: str = "line",
        p0: float = 0.1,
        timeout: float = 300.0,
    ) -> Benchmark:
        input_path = Path(input_path)
        g = Granularity(granularity)
        config = ExternalOracleConfig(oracle_cmd, input_path.name, timeout)
        return cls(
            name,
            lambda: segment(input_path.read_bytes(), g),
            lambda: ExternalOracle(config),
            p0,
        )

    @classmethod
    def planted(cls, name: str, n: int, k: int, seed: int, p0: float = 0.1) -> Benchmark:
        elements, kernel = gen_planted(n, k, seed)
        return cls(name, lambda: elements, lambda: planted_oracle(kernel), p0)


def planted_suite(n: int = 256, k: int = 16, seeds: Sequence[int] = range(20), p0: float = 0.1):
    return [Benchmark.planted(f"planted-n{n}-k{k}-s{s}", n, k, s, p0) for s in seeds]


@dataclass
class Manifest:
    benchmarks: list[Benchmark]
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    repetitions: int = 5
    base_seed: int = 0
    parallelism: int = 1
    fixpoint: bool = False
    max_iterations: int = 10
    tie: str = TIE_STRICT
    cache: bool = True
    max_queries: int | None = None

    def __post_init__(self) -> None:
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


def load_manifest(path: str | Path) -> Manifest:
    """Read a JSON or TOML manifest; relative input paths resolve against its directory."""
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        raw = tomllib.loads(path.read_text())
    else:
        raw = json.loads(path.read_text())
    timeout = float(raw.get("timeout", 300.0))
    benches = []
    for b in raw["benchmarks"]:
        p0 = float(b.get("p0", 0.1))
        if "planted" in b:
            planted = b["planted"]
            benches.append(
                Benchmark.planted(b["name"], planted["n"], planted["k"], planted.get("seed", 0), p0)
            )
            continue
        input_path = Path(b["input_path"])
        if not input_path.is_absolute():
            input_path = path.parent / input_path
        benches.append(
            Benchmark.from_files(
                b["name"],
                input_path,
                b["oracle_cmd"],
                b.get("granularity", "line"),
                p0,
                float(b.get("timeout", timeout)),
            )
        )
    return Manifest(
        benchmarks=benches,
        algorithms=list(raw.get("algorithms", ALGORITHMS)),
        repetitions=int(raw.get("repetitions", 5)),
        base_seed=int(raw.get("base_seed", 0)),
        parallelism=int(raw.get("parallelism", 1)),
        fixpoint=bool(raw.get("fixpoint", False)),
        max_iterations=int(raw.get("max_iterations", 10)),
        tie=raw.get("tie", TIE_STRICT),
        cache=bool(raw.get("cache", True)),
        max_queries=raw.get("max_queries"),
    )


@dataclass
class RunResult:
    benchmark: str
    algorithm: str
    repetition: int
    seed: int
    final_size: int = 0
    time: float = 0.0
    queries: int = 0
    stats: RunStats = field(default_factory=RunStats)
    telemetry: TelemetrySink | None = None
    error: str | None = None


def run_cell(manifest: Manifest, bench: Benchmark, algorithm: str, repetition: int) -> RunResult:
    seed = manifest.base_seed + repetition
    result = RunResult(bench.name, algorithm, repetition, seed)
    sink = TelemetrySink(algorithm, bench.name)
    try:
        elements = bench.load()
        oracle = bench.make_oracle()
        params = dict(
            p0=bench.p0,
            seed=seed,
            tie=manifest.tie,
            sink=sink,
            cache=QueryCache() if manifest.cache else None,
            max_queries=manifest.max_queries,
        )
        if manifest.fixpoint:
            out = fixpoint_reduce(algorithm, elements, oracle, manifest.max_iterations, **params)
        else:
            out = run_algorithm(algorithm, elements, oracle, **params)
    except (ReductionError, OSError) as exc:
        LOG.warning("%s/%s rep %d failed: %s", bench.name, algorithm, repetition, exc)
        result.error = str(exc)
        return result
    result.final_size = len(out.final)
    result.time = out.wall_time
    result.queries = out.oracle_invocations
    result.stats = sink.stats()
    result.telemetry = sink
    return result


def _gm_or_zero(xs: Sequence[float]) -> float:
    # a metric that is 0 in some run (e.g. no queries) has geometric mean 0
    return 0.0 if any(x <= 0 for x in xs) else geometric_mean(xs)


@dataclass
class MatrixResult:
    runs: list[RunResult]
    rows: list[dict]
    pvalues: list[dict]

    def row(self, benchmark: str, algorithm: str) -> dict:
        for r in self.rows:
            if r["benchmark"] == benchmark and r["algorithm"] == algorithm:
                return r
        raise KeyError((benchmark, algorithm))

    def pvalue(self, metric: str, a: str, b: str) -> dict:
        for r in self.pvalues:
            if r["metric"] == metric and {r["algorithm_a"], r["algorithm_b"]} == {a, b}:
                return r
        raise KeyError((metric, a, b))

    def stats_by_algorithm(self) -> dict[str, RunStats]:
        out: dict[str, RunStats] = {}
        for run in self.runs:
            if run.error is None:
                out[run.algorithm] = out.get(run.algorithm, RunStats()).merge(run.stats)
        return out


RESULT_FIELDS = ["benchmark", "algorithm", "runs", "status", "final_size_gm", "time_gm", "queries_gm"]
PVALUE_FIELDS = ["metric", "algorithm_a", "algorithm_b", "n", "gm_a", "gm_b", "statistic", "p_value", "note"]


def aggregate(manifest: Manifest, runs: list[RunResult]) -> MatrixResult:
    rows = []
    for bench, alg in itertools.product(manifest.benchmarks, manifest.algorithms):
        cell = [r for r in runs if r.benchmark == bench.name and r.algorithm == alg]
        ok = [r for r in cell if r.error is None]
        row = {"benchmark": bench.name, "algorithm": alg, "runs": len(ok)}
        if len(ok) < len(cell):
            row["status"] = "failed: " + next(r.error for r in cell if r.error)
            row.update(final_size_gm="", time_gm="", queries_gm="")
        else:
            row["status"] = "ok"
            row["final_size_gm"] = _gm_or_zero([r.final_size for r in ok])
            row["time_gm"] = _gm_or_zero([r.time for r in ok])
            row["queries_gm"] = _gm_or_zero([r.queries for r in ok])
        rows.append(row)

    pvalues = []
    for a, b in itertools.combinations(manifest.algorithms, 2):
        pairs = []
        for bench in manifest.benchmarks:
            ra = next(r for r in rows if r["benchmark"] == bench.name and r["algorithm"] == a)
            rb = next(r for r in rows if r["benchmark"] == bench.name and r["algorithm"] == b)
            if ra["status"] == "ok" and rb["status"] == "ok":
                pairs.append((ra, rb))
        for metric in METRICS:
            key = f"{metric}_gm"
            xs = [ra[key] for ra, _ in pairs]
            ys = [rb[key] for _, rb in pairs]
            entry = {"metric": metric, "algorithm_a": a, "algorithm_b": b, "n": len(pairs)}
            entry["gm_a"] = _gm_or_zero(xs) if xs else ""
            entry["gm_b"] = _gm_or_zero(ys) if ys else ""
            try:
                w = wilcoxon_signed_rank(xs, ys)
                entry.update(statistic=w.statistic, p_value=w.p_value, note="")
            except ValueError as exc:
                entry.update(statistic="", p_value="", note=str(exc))
            pvalues.append(entry)
    return MatrixResult(runs, rows, pvalues)


def run_matrix(manifest: Manifest, out_dir: str | Path | None = None) -> MatrixResult:
    """Run every (benchmark, algorithm, repetition) cell and aggregate.

    Repetition ``i`` uses seed ``base_seed + i``. Cells run on
    ``parallelism`` threads, each with its own cache and telemetry sink.
    """
    cells = list(
        itertools.product(manifest.benchmarks, manifest.algorithms, range(manifest.repetitions))
    )
    if manifest.parallelism > 1:
        with ThreadPoolExecutor(manifest.parallelism) as pool:
            runs = list(pool.map(lambda c: run_cell(manifest, *c), cells))
    else:
        runs = [run_cell(manifest, *c) for c in cells]
    result = aggregate(manifest, runs)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def _csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in fields})
    return buf.getvalue()


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else v


def results_csv(result: MatrixResult) -> str:
    return _csv(result.rows, RESULT_FIELDS)


def pvalues_csv(result: MatrixResult) -> str:
    return _csv(result.pvalues, PVALUE_FIELDS)


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def write_outputs(result: MatrixResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    tele = out / "telemetry"
    tele.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(result))
    (out / "pvalues.csv").write_text(pvalues_csv(result))
    (out / "results.json").write_text(
        json.dumps(
            {
                "results": result.rows,
                "pvalues": result.pvalues,
                "query_stats": {a: s.to_dict() for a, s in result.stats_by_algorithm().items()},
            },
            indent=1,
        )
        + "\n"
    )
    for run in result.runs:
        if run.telemetry is not None:
            name = _safe(f"{run.benchmark}__{run.algorithm}__{run.repetition}.json")
            run.telemetry.write_json(tele / name)
