"""Query execution shared by the reducers: caching, budget, telemetry."""

from __future__ import annotations

import time
from typing import Callable

from .core import ElementList, ReductionOutcome
from .oracle import (
    PreconditionError,
    PropertyOracle,
    QueryCache,
    ReductionError,
    Verdict,
)
from .telemetry import TelemetrySink


class QueryBudgetExhausted(Exception):
    pass


class QueryRunner:
    """Evaluates deletion attempts against an oracle on behalf of a reducer.

    Every attempt counts as a query, cache hits included. Precondition and
    final checks go through :meth:`check` and are not counted.
    """

    def __init__(
        self,
        oracle: PropertyOracle,
        algorithm: str,
        sink: TelemetrySink | None = None,
        cache: QueryCache | None = None,
        max_queries: int | None = None,
    ) -> None:
        self.oracle = oracle
        self.algorithm = algorithm
        self.sink = sink
        self.cache = cache
        self.max_queries = max_queries
        self.queries = 0
        self.cache_hits = 0
        self.query_indices: list[int] = []

    def _evaluate(self, elements: ElementList) -> tuple[Verdict, bool]:
        if self.cache is None:
            return self.oracle.evaluate(elements), False
        return self.cache.evaluate(self.oracle, elements)

    def check(self, elements: ElementList) -> bool:
        return self._evaluate(elements)[0].holds

    def require(self, elements: ElementList) -> None:
        """Drivers' preconditions: the input holds and the empty list fails."""
        if not self.check(elements):
            raise PreconditionError("property does not hold on the original input")
        if len(elements) and self.check(ElementList()):
            raise PreconditionError("property holds on the empty input; nothing to reduce")

    def attempt(self, live: ElementList, deleted: frozenset[int], round_: int) -> bool:
        """Test ``live`` minus ``deleted``; True when the property still holds."""
        if self.max_queries is not None and self.queries >= self.max_queries:
            raise QueryBudgetExhausted
        variant = live.without(deleted)
        start = time.perf_counter()
        verdict, cached = self._evaluate(variant)
        duration = time.perf_counter() - start
        self.queries += 1
        self.cache_hits += cached
        if self.sink is not None:
            rec = self.sink.record(
                self.algorithm,
                round_,
                frozenset(deleted),
                variant.ids(),
                verdict.value,
                cached,
                duration,
            )
            self.query_indices.append(rec.index)
        return verdict.holds


class Progress:
    """Current best list and round bookkeeping of a running reducer.

    Reducers assign ``current`` after each successful deletion so an
    exhausted query budget still leaves a property-holding result.
    """

    def __init__(self, current: ElementList) -> None:
        self.current = current
        self.rounds = 0
        self.round_sizes: list[int] = []

    def start_round(self, size: int) -> None:
        self.rounds += 1
        self.round_sizes.append(size)


Body = Callable[[QueryRunner, Progress], None]


def drive(
    algorithm: str,
    body: Body,
    elements: ElementList,
    oracle: PropertyOracle,
    sink: TelemetrySink | None = None,
    cache: QueryCache | None = None,
    max_queries: int | None = None,
    check_preconditions: bool = True,
) -> ReductionOutcome:
    runner = QueryRunner(oracle, algorithm, sink, cache, max_queries)
    if check_preconditions:
        runner.require(elements)
    progress = Progress(elements)
    exhausted = False
    start = time.perf_counter()
    try:
        body(runner, progress)
    except QueryBudgetExhausted:
        exhausted = True
    wall = time.perf_counter() - start
    final = progress.current
    if check_preconditions and not runner.check(final):
        raise ReductionError("property no longer holds on the result; is the oracle deterministic?")
    return ReductionOutcome(
        algorithm=algorithm,
        initial_size=len(elements),
        final=final,
        oracle_invocations=runner.queries,
        cache_hits=runner.cache_hits,
        wall_time=wall,
        rounds=progress.rounds,
        round_sizes=progress.round_sizes,
        per_query=runner.query_indices,
        iteration_sizes=[len(final)],
        budget_exhausted=exhausted,
    )
