"""Probabilistic delta debugging driven by per-element probabilities."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .core import Element, ElementList, ReductionOutcome
from .oracle import PropertyOracle, QueryCache
from .runner import Progress, QueryRunner, drive
from .telemetry import TelemetrySink

NAME = "probdd"
NAME_NORANDOM = "probdd-norandom"

# Relative slack for gain comparisons; exact ties such as 3*0.75**3 == 4*0.75**4
# must not be decided by rounding noise.
GAIN_REL_TOL = 1e-12

TIE_STRICT = "strict"
TIE_LARGER = "larger"


def gain_improves(gain: float, best: float, tie: str = TIE_STRICT) -> bool:
    """Whether a prefix with ``gain`` replaces the best prefix so far.

    ``strict`` grows only on a strictly larger gain; ``larger`` also grows
    on a tie.
    """
    if gain <= 0.0:
        return False
    if tie == TIE_STRICT:
        return gain > best * (1.0 + GAIN_REL_TOL)
    if tie == TIE_LARGER:
        return gain >= best * (1.0 - GAIN_REL_TOL)
    raise ValueError(f"unknown tie rule {tie!r}")


@dataclass
class ProbState:
    p0: float
    seed: int = 0
    randomized: bool = True
    tie: str = TIE_STRICT
    probs: dict[int, float] = field(default_factory=dict)
    round: int = 0
    touched: set[int] = field(default_factory=set)
    # live probabilities at the start of each round, then at termination
    history: list[dict[int, float]] = field(default_factory=list)
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.p0 < 1.0:
            raise ValueError(f"p0 must be in (0, 1), got {self.p0}")
        if self.tie not in (TIE_STRICT, TIE_LARGER):
            raise ValueError(f"unknown tie rule {self.tie!r}")
        self.rng = random.Random(self.seed)

    @classmethod
    def initial(cls, elements: ElementList, p0: float, **kwargs) -> ProbState:
        state = cls(p0, **kwargs)
        state.probs = {e.id: p0 for e in elements}
        return state

    def open_ids(self, live: ElementList) -> list[int]:
        return [e.id for e in live if self.probs[e.id] < 1.0]


def select_subset(
    state: ProbState, live: ElementList, rng: random.Random | None = None
) -> list[Element]:
    """Lowest-probability prefix maximizing ``|S| * prod(1 - p)``.

    Equal probabilities are shuffled with ``rng`` when the state is
    randomized and kept in id order otherwise.
    """
    order = list(live)
    if state.randomized:
        (rng or state.rng).shuffle(order)
    else:
        order.sort(key=lambda e: e.id)
    order.sort(key=lambda e: state.probs[e.id])

    subset: list[Element] = []
    best = 0.0
    keep = 1.0
    for e in order:
        keep *= 1.0 - state.probs[e.id]
        gain = (len(subset) + 1) * keep
        if not gain_improves(gain, best, state.tie):
            break
        best = gain
        subset.append(e)
    if not subset:
        raise ValueError("every live element already has probability 1")
    return subset


def update_probabilities(state: ProbState, subset: Sequence[Element]) -> None:
    """Raise the probabilities of a subset whose deletion just failed."""
    if len(subset) == 1:
        state.probs[subset[0].id] = 1.0
        return
    keep = 1.0
    for e in subset:
        keep *= 1.0 - state.probs[e.id]
    factor = 1.0 / (1.0 - keep)
    for e in subset:
        state.probs[e.id] = min(1.0, factor * state.probs[e.id])


def _probdd(state: ProbState):
    def body(runner: QueryRunner, progress: Progress) -> None:
        live = progress.current
        round_started = False
        while state.open_ids(live):
            subset = select_subset(state, live)
            if not round_started:
                state.history.append({e.id: state.probs[e.id] for e in live})
                progress.start_round(len(subset))
                round_started = True
            ids = frozenset(e.id for e in subset)
            if runner.attempt(live, ids, state.round):
                live = progress.current = live.without(ids)
                for i in ids:
                    del state.probs[i]
                state.touched -= ids
            else:
                update_probabilities(state, subset)
                state.touched |= ids
            open_ids = state.open_ids(live)
            if open_ids and state.touched.issuperset(open_ids):
                state.round += 1
                state.touched.clear()
                round_started = False
        state.history.append({e.id: state.probs[e.id] for e in live})

    return body


def probdd_reduce(
    elements: ElementList,
    oracle: PropertyOracle,
    p0: float = 0.1,
    seed: int = 0,
    randomized: bool = True,
    tie: str = TIE_STRICT,
    sink: TelemetrySink | None = None,
    cache: QueryCache | None = None,
    max_queries: int | None = None,
    check_preconditions: bool = True,
    state: ProbState | None = None,
) -> ReductionOutcome:
    """Delete gain-maximizing low-probability prefixes until every survivor has p = 1.

    Pass ``state`` to inspect the probabilities afterwards.
    """
    if state is None:
        state = ProbState.initial(elements, p0, seed=seed, randomized=randomized, tie=tie)
    name = NAME if state.randomized else NAME_NORANDOM
    return drive(
        name, _probdd(state), elements, oracle, sink, cache, max_queries, check_preconditions
    )
