"""Counter-based delta debugging: a round counter drives a precomputed size schedule."""

from __future__ import annotations

import math

from .core import ElementList, ReductionOutcome, partition
from .oracle import PropertyOracle, QueryCache
from .runner import Progress, QueryRunner, drive
from .telemetry import TelemetrySink
from .theory import GROWTH_FACTOR, optimal_int_size

NAME = "cdd"


def compute_size(r: int, p0: float, growth: float = GROWTH_FACTOR) -> int:
    """Subset size for round ``r``: integer argmax of s * (1 - p_r) ** s.

    p_r = p0 * growth ** r. Once p_r reaches 0.5 a singleton is optimal,
    which also keeps p_r >= 1 away from the gain formula.
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must be in (0, 1), got {p0!r}")
    if r < 0:
        raise ValueError(f"round must be >= 0, got {r}")
    # log form avoids overflowing growth ** r for huge r
    log_p = math.log(p0) + r * math.log(growth)
    if log_p >= math.log(0.5):
        return 1
    return optimal_int_size(math.exp(log_p))


def size_schedule(p0: float, growth: float = GROWTH_FACTOR) -> list[int]:
    sizes = []
    r = 0
    while True:
        sizes.append(compute_size(r, p0, growth))
        if sizes[-1] == 1:
            return sizes
        r += 1


def _cdd(p0: float, growth: float):
    def body(runner: QueryRunner, progress: Progress) -> None:
        r = 0
        while True:
            size = compute_size(r, p0, growth)
            progress.start_round(size)
            # chunks are fixed at the start of the round; a deletion does not
            # restart the sweep
            for chunk in partition(progress.current, size):
                current = progress.current
                if runner.attempt(current, chunk.ids(), r):
                    progress.current = current.without(chunk.ids())
            r += 1
            if size <= 1:
                return

    return body


def cdd_reduce(
    elements: ElementList,
    oracle: PropertyOracle,
    p0: float = 0.1,
    sink: TelemetrySink | None = None,
    cache: QueryCache | None = None,
    max_queries: int | None = None,
    check_preconditions: bool = True,
    growth: float = GROWTH_FACTOR,
) -> ReductionOutcome:
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must be in (0, 1), got {p0!r}")
    return drive(
        NAME, _cdd(p0, growth), elements, oracle, sink, cache, max_queries, check_preconditions
    )
