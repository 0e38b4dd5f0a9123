"""Algorithm selection and the fixpoint driver shared by all reducers."""

from __future__ import annotations

from .cdd import cdd_reduce
from .core import ElementList, ReductionOutcome
from .ddmin import ddmin_reduce
from .oracle import PropertyOracle, QueryCache
from .probdd import TIE_STRICT, probdd_reduce
from .telemetry import TelemetrySink

ALGORITHMS = ("ddmin", "probdd", "probdd-norandom", "cdd")


def run_algorithm(
    algorithm: str,
    elements: ElementList,
    oracle: PropertyOracle,
    *,
    p0: float = 0.1,
    seed: int = 0,
    tie: str = TIE_STRICT,
    sink: TelemetrySink | None = None,
    cache: QueryCache | None = None,
    max_queries: int | None = None,
    check_preconditions: bool = True,
) -> ReductionOutcome:
    common = dict(
        sink=sink, cache=cache, max_queries=max_queries, check_preconditions=check_preconditions
    )
    if algorithm == "ddmin":
        return ddmin_reduce(elements, oracle, **common)
    if algorithm in ("probdd", "probdd-norandom"):
        return probdd_reduce(
            elements,
            oracle,
            p0=p0,
            seed=seed,
            randomized=algorithm == "probdd",
            tie=tie,
            **common,
        )
    if algorithm == "cdd":
        return cdd_reduce(elements, oracle, p0=p0, **common)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")


def fixpoint_reduce(
    algorithm: str,
    elements: ElementList,
    oracle: PropertyOracle,
    max_iterations: int = 10,
    *,
    seed: int = 0,
    sink: TelemetrySink | None = None,
    max_queries: int | None = None,
    **params,
) -> ReductionOutcome:
    """Rerun ``algorithm`` on its own output until the size stops shrinking.

    Iteration ``i`` uses seed ``seed + i``. ``iteration_sizes`` of the
    result lists the size after every iteration, including the final
    no-change confirmation.
    """
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be >= 1, got {max_iterations}")
    total: ReductionOutcome | None = None
    current = elements
    for i in range(max_iterations):
        if sink is not None:
            sink.start_iteration(i)
        budget = None if max_queries is None else max_queries - (total.oracle_invocations if total else 0)
        out = run_algorithm(
            algorithm,
            current,
            oracle,
            seed=seed + i,
            sink=sink,
            max_queries=budget,
            check_preconditions=i == 0,
            **params,
        )
        if total is None:
            total = out
        else:
            total.final = out.final
            total.oracle_invocations += out.oracle_invocations
            total.cache_hits += out.cache_hits
            total.wall_time += out.wall_time
            total.rounds += out.rounds
            total.round_sizes += out.round_sizes
            total.per_query += out.per_query
            total.iteration_sizes += out.iteration_sizes
            total.budget_exhausted = out.budget_exhausted
        if out.budget_exhausted or len(out.final) >= len(current):
            break
        current = out.final
    assert total is not None
    return total
