"""Generators for desk-scale reduction experiments with known ground truth."""

from __future__ import annotations

import itertools
import random
import stat
from dataclasses import dataclass
from pathlib import Path

from .core import ElementList
from .oracle import FunctionOracle, table_oracle

MAX_TABLE_ELEMENTS = 8


def planted_payload(i: int) -> bytes:
    return b"tok%d\n" % i


def gen_planted(n: int, k: int, seed: int = 0) -> tuple[ElementList, frozenset[int]]:
    """``n`` distinct one-line elements and a kernel of ``k`` ids drawn with ``seed``."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    elements = ElementList.from_payloads(planted_payload(i) for i in range(n))
    kernel = frozenset(random.Random(seed).sample(range(n), k))
    return elements, kernel


def all_fail_oracle(elements: ElementList) -> FunctionOracle:
    """Holds on the full list only, so every deletion attempt fails."""
    full = elements.ids()
    return FunctionOracle(lambda v: v.ids() == full, "all-fail", by_ids=True)


def one_minimal_sets(
    holding: set[frozenset[int]] | frozenset[frozenset[int]],
) -> set[frozenset[int]]:
    """Holding sets from which no single deletion keeps the property."""
    return {s for s in holding if not any(s - {e} in holding for e in s)}


@dataclass
class TruthTable:
    elements: ElementList
    holding: frozenset[frozenset[int]]
    one_minimal: frozenset[frozenset[int]]

    @property
    def oracle(self) -> FunctionOracle:
        return table_oracle(self.holding, universe=self.elements.ids())


def truth_table(n: int, holding) -> TruthTable:
    elements = ElementList.from_payloads(planted_payload(i) for i in range(n))
    hold = frozenset(frozenset(s) for s in holding)
    return TruthTable(elements, hold, frozenset(one_minimal_sets(hold)))


def gen_truth_table(n: int, seed: int = 0, density: float = 0.3) -> TruthTable:
    """Random non-monotone truth table over ``n`` <= 8 elements.

    The full set always holds and the empty set never does; every other
    subset holds with probability ``density``. All 2**n subsets are
    enumerated to find the 1-minimal holding sets.
    """
    if not 1 <= n <= MAX_TABLE_ELEMENTS:
        raise ValueError(f"n must be in [1, {MAX_TABLE_ELEMENTS}], got {n}")
    rng = random.Random(seed)
    full = frozenset(range(n))
    holding = {full}
    for size in range(1, n):
        for combo in itertools.combinations(range(n), size):
            if rng.random() < density:
                holding.add(frozenset(combo))
    return truth_table(n, holding)


def write_planted_pair(
    directory: str | Path, n: int, k: int, seed: int = 0, name: str = "input.txt"
) -> tuple[Path, Path, frozenset[int]]:
    """Write an input file and a POSIX-shell interestingness test for it.

    The script exits 0 iff every kernel line is still present in the
    candidate file given as its first argument.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    elements, kernel = gen_planted(n, k, seed)
    input_path = directory / name
    input_path.write_bytes(b"".join(e.payload for e in elements))
    lines = ["#!/bin/sh", f"# planted kernel: n={n} k={k} seed={seed}"]
    for i in sorted(kernel):
        token = planted_payload(i).decode().strip()
        lines.append(f'grep -qxF "{token}" "$1" || exit 1')
    lines.append("exit 0")
    script = directory / "oracle.sh"
    script.write_text("\n".join(lines) + "\n")
    script.chmod(script.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return input_path, script, kernel
