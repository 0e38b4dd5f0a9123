"""Elements, segmentation and the outcome record shared by the reducers."""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class Granularity(str, enum.Enum):
    LINE = "line"
    WORD = "word"
    CHAR = "char"


@dataclass(frozen=True)
class Element:
    id: int
    payload: bytes


@dataclass(frozen=True)
class ElementList:
    """Ordered, immutable sequence of elements.

    Reduction only ever deletes, so every list derived from a segmentation
    keeps the original relative order of its surviving ids.
    """

    elements: tuple[Element, ...] = ()

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return ElementList(self.elements[index])
        return self.elements[index]

    def ids(self) -> frozenset[int]:
        return frozenset(e.id for e in self.elements)

    def id_list(self) -> list[int]:
        return [e.id for e in self.elements]

    def without(self, ids: Iterable[int]) -> ElementList:
        drop = set(ids)
        return ElementList(tuple(e for e in self.elements if e.id not in drop))

    def only(self, ids: Iterable[int]) -> ElementList:
        keep = set(ids)
        return ElementList(tuple(e for e in self.elements if e.id in keep))

    @classmethod
    def from_payloads(cls, payloads: Iterable[bytes | str]) -> ElementList:
        return cls(
            tuple(
                Element(i, p.encode() if isinstance(p, str) else bytes(p))
                for i, p in enumerate(payloads)
            )
        )


_LINE_RE = re.compile(rb"[^\n]*\n|[^\n]+")
_WORD_RE = re.compile(rb"\S+\s*")


def _split_words(data: bytes) -> list[bytes]:
    m = re.match(rb"\s*", data)
    lead = m.group(0) if m else b""
    tokens = _WORD_RE.findall(data, len(lead))
    if not tokens:
        return [data] if data else []
    tokens[0] = lead + tokens[0]
    return tokens


def _split_chars(data: bytes) -> list[bytes]:
    # surrogateescape keeps invalid UTF-8 bytes as their own elements
    text = data.decode("utf-8", errors="surrogateescape")
    return [c.encode("utf-8", errors="surrogateescape") for c in text]


def segment(data: bytes, granularity: Granularity | str = Granularity.LINE) -> ElementList:
    """Split ``data`` into elements whose payloads concatenate back to ``data``.

    Line mode keeps each newline with its line. Word mode attaches every
    whitespace run to the token before it, and leading whitespace to the
    first token, so deleting a token also deletes its separator.
    """
    g = Granularity(granularity)
    if g is Granularity.LINE:
        parts = _LINE_RE.findall(data)
    elif g is Granularity.WORD:
        parts = _split_words(data)
    else:
        parts = _split_chars(data)
    return ElementList.from_payloads(parts)


def reassemble(elements: ElementList | Sequence[Element]) -> bytes:
    return b"".join(e.payload for e in elements)


def content_digest(elements: ElementList | Sequence[Element]) -> str:
    return hashlib.sha256(reassemble(elements)).hexdigest()


def partition(elements: ElementList, size: int) -> list[ElementList]:
    """Chunks of ``size`` elements in order; a smaller remainder goes last."""
    if size < 1:
        raise ValueError(f"chunk size must be >= 1, got {size}")
    return [elements[i : i + size] for i in range(0, len(elements), size)]


@dataclass
class ReductionOutcome:
    algorithm: str
    initial_size: int
    final: ElementList
    oracle_invocations: int = 0
    cache_hits: int = 0
    wall_time: float = 0.0
    rounds: int = 0
    round_sizes: list[int] = field(default_factory=list)
    per_query: list[int] = field(default_factory=list)
    iteration_sizes: list[int] = field(default_factory=list)
    budget_exhausted: bool = False

    @property
    def final_size(self) -> int:
        return len(self.final)

    def summary(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "initial_size": self.initial_size,
            "final_size": len(self.final),
            "final_bytes": len(reassemble(self.final)),
            "queries": self.oracle_invocations,
            "cache_hits": self.cache_hits,
            "wall_time": self.wall_time,
            "rounds": self.rounds,
            "round_sizes": list(self.round_sizes),
            "iteration_sizes": list(self.iteration_sizes),
            "budget_exhausted": self.budget_exhausted,
        }
