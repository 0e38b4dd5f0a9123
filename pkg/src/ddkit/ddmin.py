"""Classic ddmin: minimize to subset, minimize to complement, subdivide."""

from __future__ import annotations

from .core import ElementList, ReductionOutcome, partition
from .oracle import PropertyOracle, QueryCache
from .runner import Progress, QueryRunner, drive
from .telemetry import TelemetrySink

NAME = "ddmin"


def _ddmin(runner: QueryRunner, progress: Progress) -> None:
    current = progress.current
    if len(current) <= 1:
        return
    size = max(1, len(current) // 2)
    round_ = 0
    progress.start_round(size)
    step = 1
    while True:
        chunks = partition(current, size)
        if step == 1:
            subsets_tried = len(chunks) > 1
            kept = None
            if len(chunks) > 1:
                for chunk in chunks:
                    if runner.attempt(current, current.ids() - chunk.ids(), round_):
                        kept = chunk
                        break
            if kept is not None:
                current = progress.current = kept
                if len(current) <= 1:
                    return
                size = max(1, len(current) // 2)
                continue
            step = 2
            continue

        # Step 2. With exactly two chunks every complement is the sibling
        # chunk, already tried if step 1 ran on this same list.
        removed = None
        if len(chunks) > 2 or (len(chunks) == 2 and not subsets_tried):
            for chunk in chunks:
                if runner.attempt(current, chunk.ids(), round_):
                    removed = chunk
                    break
        if removed is not None:
            current = progress.current = current.without(removed.ids())
            subsets_tried = False
            continue

        # Step 3
        if size == 1:
            return
        size = max(1, size // 2)
        round_ += 1
        progress.start_round(size)
        step = 1


def ddmin_reduce(
    elements: ElementList,
    oracle: PropertyOracle,
    sink: TelemetrySink | None = None,
    cache: QueryCache | None = None,
    max_queries: int | None = None,
    check_preconditions: bool = True,
) -> ReductionOutcome:
    """Reduce ``elements`` to a 1-minimal sublist that still satisfies ``oracle``.

    After a successful complement deletion the sweep restarts from the first
    chunk of the smaller list; those repeated attempts are the Revisit
    queries the telemetry counts.
    """
    return drive(
        NAME, _ddmin, elements, oracle, sink, cache, max_queries, check_preconditions
    )
