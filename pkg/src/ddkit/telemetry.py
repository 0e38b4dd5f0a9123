"""Per-query records and the Complement / Revisit / Other query taxonomy."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import AbstractSet, Iterable, Sequence


class Category(str, enum.Enum):
    COMPLEMENT = "Complement"
    REVISIT = "Revisit"
    OTHER = "Other"


def classify_query(
    history: AbstractSet[frozenset[int]],
    deleted_ids: frozenset[int],
    deleted_count: int,
    kept_count: int,
) -> Category:
    """Complement if the variant keeps a strict minority, else Revisit if
    ``deleted_ids`` is in ``history``, else Other.

    An exact half deletion is not a minority keep and falls through.
    """
    if deleted_count > kept_count:
        return Category.COMPLEMENT
    if deleted_ids in history:
        return Category.REVISIT
    return Category.OTHER


class QueryClassifier:
    """Tracks which subsets count as "previously tried" for Revisit.

    A query's subset is what it keeps when it is a Complement query and what
    it deletes otherwise. Subsets tried earlier in the current round become
    revisitable once a query succeeds, i.e. when a reducer that restarts its
    sweep after a deletion would come back to them. A new round (new
    partition size) clears the history.
    """

    def __init__(self) -> None:
        self._round: int | None = None
        self._tried: set[frozenset[int]] = set()
        self._revisitable: frozenset[frozenset[int]] = frozenset()

    def observe(
        self,
        round_: int,
        deleted_ids: frozenset[int],
        kept_ids: frozenset[int],
        holds: bool,
    ) -> Category:
        if round_ != self._round:
            self._round = round_
            self._tried = set()
            self._revisitable = frozenset()
        category = classify_query(
            self._revisitable, deleted_ids, len(deleted_ids), len(kept_ids)
        )
        subject = kept_ids if category is Category.COMPLEMENT else deleted_ids
        self._tried.add(subject)
        if holds:
            self._revisitable = frozenset(self._tried)
        return category


@dataclass
class QueryRecord:
    index: int
    algorithm: str
    round: int
    deleted_ids: list[int]
    deleted_count: int
    kept_count: int
    category: Category
    outcome: str
    cached: bool
    duration: float
    iteration: int = 0

    @property
    def succeeded(self) -> bool:
        return self.outcome == "holds"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["category"] = self.category.value
        return d


CSV_FIELDS = [
    "index",
    "algorithm",
    "iteration",
    "round",
    "deleted_count",
    "kept_count",
    "category",
    "outcome",
    "cached",
    "duration",
    "deleted_ids",
]


@dataclass
class CategoryStats:
    total: int = 0
    successes: int = 0

    @property
    def success_rate(self) -> float:
        return self.successes / self.total if self.total else 0.0


@dataclass
class RunStats:
    categories: dict[Category, CategoryStats] = field(
        default_factory=lambda: {c: CategoryStats() for c in Category}
    )

    @property
    def total(self) -> int:
        return sum(c.total for c in self.categories.values())

    @property
    def successes(self) -> int:
        return sum(c.successes for c in self.categories.values())

    def __getitem__(self, category: Category | str) -> CategoryStats:
        return self.categories[Category(category)]

    def merge(self, other: RunStats) -> RunStats:
        return RunStats(
            {
                c: CategoryStats(
                    self[c].total + other[c].total, self[c].successes + other[c].successes
                )
                for c in Category
            }
        )

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "successes": self.successes,
            "categories": {
                c.value: {
                    "total": s.total,
                    "successes": s.successes,
                    "success_rate": s.success_rate,
                }
                for c, s in self.categories.items()
            },
        }


def summarize(records: Iterable[QueryRecord]) -> RunStats:
    stats = RunStats()
    for r in records:
        s = stats[r.category]
        s.total += 1
        s.successes += r.succeeded
    return stats


class TelemetrySink:
    """Collects the query records of one reduction run."""

    def __init__(self, algorithm: str = "", input_name: str = "") -> None:
        self.algorithm = algorithm
        self.input_name = input_name
        self.records: list[QueryRecord] = []
        self._classifier = QueryClassifier()
        self._iteration = 0

    def start_iteration(self, iteration: int) -> None:
        self._iteration = iteration
        self._classifier = QueryClassifier()

    def record(
        self,
        algorithm: str,
        round_: int,
        deleted_ids: frozenset[int],
        kept_ids: frozenset[int],
        outcome: str,
        cached: bool,
        duration: float,
    ) -> QueryRecord:
        category = self._classifier.observe(round_, deleted_ids, kept_ids, outcome == "holds")
        rec = QueryRecord(
            index=len(self.records),
            algorithm=algorithm,
            round=round_,
            deleted_ids=sorted(deleted_ids),
            deleted_count=len(deleted_ids),
            kept_count=len(kept_ids),
            category=category,
            outcome=outcome,
            cached=cached,
            duration=duration,
            iteration=self._iteration,
        )
        self.records.append(rec)
        return rec

    def stats(self) -> RunStats:
        return summarize(self.records)

    def to_dict(self, include_durations: bool = True) -> dict:
        records = [r.to_dict() for r in self.records]
        if not include_durations:
            for r in records:
                r.pop("duration")
        return {
            "algorithm": self.algorithm,
            "input": self.input_name,
            "records": records,
            "stats": self.stats().to_dict(),
        }

    def write_json(self, path: str | Path, include_durations: bool = True) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(include_durations), indent=1, sort_keys=True) + "\n"
        )

    def to_csv(self) -> str:
        return records_to_csv(self.records)


def records_to_csv(records: Sequence[QueryRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = r.to_dict()
        row["deleted_ids"] = " ".join(map(str, r.deleted_ids))
        w.writerow({k: row[k] for k in CSV_FIELDS})
    return buf.getvalue()
