"""Closed forms relating element probability, subset size and round number.

All quantities assume every element shares one probability per round and
every subset in a round has the same size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: Per-round decay of the failure-free mass, 1 - 1/e.
DECAY = -math.expm1(-1.0)
#: Per-round growth of the probability, 1 / (1 - 1/e) = 1.58197...
GROWTH_FACTOR = 1.0 / DECAY
#: The rounded constant some implementations hardcode.
GROWTH_FACTOR_ROUNDED = 1.582

_TIE_REL_TOL = 1e-12


def _check_prob(p: float, hi: float = 1.0) -> None:
    if not (0.0 < p < hi):
        raise ValueError(f"probability must be in (0, {hi:g}), got {p!r}")


def size_from_prob(p: float) -> float:
    """Real-valued gain-maximizing subset size, -1 / ln(1 - p)."""
    _check_prob(p)
    return -1.0 / math.log1p(-p)


def expected_gain(size: float, p: float) -> float:
    """Expected number of deleted elements, size * (1 - p) ** size."""
    return size * math.exp(size * math.log1p(-p))


def next_prob_from_size(p: float, size: float) -> float:
    """Probability after a round of failed deletions of subsets of ``size``."""
    _check_prob(p)
    return p / -math.expm1(size * math.log1p(-p))


def next_prob(p: float) -> float:
    """Probability after one round at the real-valued optimal size: p / (1 - 1/e)."""
    _check_prob(p, DECAY)
    return p / DECAY


def prob_at_round(r: int, p0: float) -> float:
    """p0 / (1 - 1/e) ** r, uncapped."""
    _check_prob(p0)
    if r < 0:
        raise ValueError(f"round must be >= 0, got {r}")
    return p0 * GROWTH_FACTOR**r


def optimal_int_size(p: float) -> int:
    """Integer argmax of s * (1 - p) ** s; a tie goes to the larger size."""
    _check_prob(p)
    if p >= 0.5:
        return 1
    real = size_from_prob(p)
    lo = max(1, math.floor(real))
    hi = max(lo, math.ceil(real))
    if hi == lo:
        return lo
    # log(gain(lo + 1) / gain(lo)) directly; subtracting two log gains loses
    # the ~1/s**2 gap between neighbours once s is in the millions
    step = math.log1p(1.0 / lo)
    return hi if step + math.log1p(-p) >= -_TIE_REL_TOL * step else lo


def size_recursion(s: float) -> float:
    """Real-valued size of the next round given this round's size ``s`` > 1.

    Equal to 1 / ln((1 - 1/e) / (exp(-1/s) - 1/e)), evaluated as
    -1 / log1p(expm1(-1/s) / (1 - 1/e)) to stay accurate for large ``s``.
    """
    if not s > 1.0:
        raise ValueError(f"size must be > 1, got {s!r}")
    return -1.0 / math.log1p(math.expm1(-1.0 / s) / DECAY)


@dataclass(frozen=True)
class BoundCheck:
    size: float
    lower: float
    value: float
    upper: float
    holds: bool


def bound_check(s: float, slack: float = 1e-9) -> BoundCheck:
    """(1 - 1/e) s - 1 <= size_recursion(s) <= (1 - 1/e) s."""
    if not s >= 2:
        raise ValueError(f"size must be >= 2, got {s!r}")
    lower = DECAY * s - 1.0
    upper = DECAY * s
    value = size_recursion(s)
    return BoundCheck(s, lower, value, upper, lower - slack <= value <= upper + slack)


@dataclass(frozen=True)
class ScheduleRow:
    round: int
    prob: float
    size: int
    real_size: float | None
    next_real_size: float | None
    lower: float | None
    upper: float | None
    holds: bool | None


def schedule(p0: float, growth: float = GROWTH_FACTOR, slack: float = 1e-9) -> list[ScheduleRow]:
    """Rounds of the counter-based size schedule until the size reaches 1.

    Each row carries the real-valued size for the round's probability and,
    when that size exceeds 1, the bound check on the next real size.
    """
    from .cdd import compute_size

    rows = []
    r = 0
    while True:
        p = p0 * growth**r
        size = compute_size(r, p0, growth)
        real = size_from_prob(p) if p < 1.0 else None
        nxt = lower = upper = holds = None
        if real is not None and real > 1.0:
            nxt = size_recursion(real)
            lower, upper = DECAY * real - 1.0, DECAY * real
            holds = lower - slack <= nxt <= upper + slack
        rows.append(ScheduleRow(r, p, size, real, nxt, lower, upper, holds))
        if size == 1:
            return rows
        r += 1
