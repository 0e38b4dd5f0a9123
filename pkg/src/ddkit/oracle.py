"""Property oracles: external interestingness tests, synthetic oracles, caching."""

from __future__ import annotations

import enum
import hashlib
import logging
import os
import shlex
import signal
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Collection, Iterable, Sequence

from .core import ElementList, content_digest

LOG = logging.getLogger(__name__)


class ReductionError(Exception):
    pass


class PreconditionError(ReductionError):
    """The oracle does not accept the starting point of a reduction."""


class OracleUnavailableError(ReductionError):
    """The interestingness command could not be spawned."""


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    TIMEOUT = "timeout"

    @property
    def holds(self) -> bool:
        return self is Verdict.HOLDS


def id_digest(elements: ElementList) -> str:
    ids = ",".join(str(i) for i in sorted(elements.ids()))
    return hashlib.sha256(ids.encode()).hexdigest()


class PropertyOracle:
    """Decides whether a variant still has the property being preserved.

    Subclasses implement :meth:`evaluate`. ``cache_key`` must map lists that
    the oracle cannot tell apart to the same key; content digests are right
    for anything that only sees the reassembled bytes.
    """

    description = "oracle"

    def evaluate(self, elements: ElementList) -> Verdict:
        raise NotImplementedError

    def cache_key(self, elements: ElementList) -> str:
        return content_digest(elements)

    def __call__(self, elements: ElementList) -> Verdict:
        return self.evaluate(elements)


class FunctionOracle(PropertyOracle):
    def __init__(
        self,
        predicate: Callable[[ElementList], bool],
        description: str = "function",
        by_ids: bool = False,
    ) -> None:
        self.predicate = predicate
        self.description = description
        self.by_ids = by_ids
        self.evaluations = 0

    def evaluate(self, elements: ElementList) -> Verdict:
        self.evaluations += 1
        return Verdict.HOLDS if self.predicate(elements) else Verdict.FAILS

    def cache_key(self, elements: ElementList) -> str:
        return id_digest(elements) if self.by_ids else content_digest(elements)


def planted_oracle(kernel: Iterable[int]) -> FunctionOracle:
    """Monotone oracle that holds iff every kernel id is still present."""
    k = frozenset(kernel)
    if not k:
        raise ValueError("planted oracle needs a nonempty kernel (psi(empty) must fail)")
    return FunctionOracle(
        lambda v: k <= v.ids(), description=f"planted(|K|={len(k)})", by_ids=True
    )


def table_oracle(
    holding_sets: Iterable[Collection[int]], universe: Collection[int] | None = None
) -> FunctionOracle:
    """Oracle given by an explicit truth table over id-sets.

    ``universe`` is the full initial id-set; it defaults to the union of the
    holding sets and must itself be one of them.
    """
    table = frozenset(frozenset(s) for s in holding_sets)
    full = frozenset(universe) if universe is not None else frozenset().union(*table)
    if full not in table:
        raise ValueError("the full initial id-set must be a holding set")
    if frozenset() in table:
        raise ValueError("the empty set must not be a holding set")
    return FunctionOracle(
        lambda v: v.ids() in table, description=f"table({len(table)} sets)", by_ids=True
    )


class QueryCache:
    """Insert-once verdict memo keyed by the oracle's cache key."""

    def __init__(self) -> None:
        self._verdicts: dict[str, Verdict] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._verdicts)

    def evaluate(self, oracle: PropertyOracle, elements: ElementList) -> tuple[Verdict, bool]:
        key = oracle.cache_key(elements)
        with self._lock:
            cached = self._verdicts.get(key)
            if cached is not None:
                self.hits += 1
                return cached, True
        verdict = oracle.evaluate(elements)
        with self._lock:
            self.misses += 1
            self._verdicts.setdefault(key, verdict)
        return verdict, False


@dataclass
class ExternalOracleConfig:
    command: Sequence[str]
    candidate_filename: str = "candidate"
    timeout: float = 300.0
    log_dir: Path | None = None
    env: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if isinstance(self.command, str):
            self.command = shlex.split(self.command)
        if not self.command:
            raise ValueError("oracle command is empty")
        # the command runs inside the temp dir, so pin relative script paths now
        self.command = list(self.command)
        if os.sep in self.command[0]:
            self.command[0] = os.path.abspath(self.command[0])
        if not self.timeout > 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if os.sep in self.candidate_filename or not self.candidate_filename:
            raise ValueError(f"bad candidate filename {self.candidate_filename!r}")


class ExternalOracle(PropertyOracle):
    """Runs ``CMD <candidate path>`` in a fresh temp dir; exit 0 means the property holds."""

    def __init__(self, config: ExternalOracleConfig) -> None:
        self.config = config
        self.description = shlex.join(config.command)
        self.spawns = 0
        self.timeouts = 0
        self._lock = threading.Lock()

    def evaluate(self, elements: ElementList) -> Verdict:
        data = b"".join(e.payload for e in elements)
        return self.run_bytes(data)

    def run_bytes(self, data: bytes) -> Verdict:
        cfg = self.config
        with self._lock:
            self.spawns += 1
            index = self.spawns
        with tempfile.TemporaryDirectory(prefix="ddkit-") as workdir:
            path = Path(workdir) / cfg.candidate_filename
            path.write_bytes(data)
            env = {**os.environ, **cfg.env, "DD_CANDIDATE": str(path)}
            try:
                proc = subprocess.Popen(
                    [*cfg.command, str(path)],
                    cwd=workdir,
                    env=env,
                    stdin=subprocess.DEVNULL,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.PIPE,
                    start_new_session=True,
                )
            except OSError as exc:
                raise OracleUnavailableError(
                    f"cannot run oracle {self.description!r}: {exc}"
                ) from exc
            try:
                out, err = proc.communicate(timeout=cfg.timeout)
                verdict = Verdict.HOLDS if proc.returncode == 0 else Verdict.FAILS
            except subprocess.TimeoutExpired:
                _kill_group(proc)
                out, err = proc.communicate()
                verdict = Verdict.TIMEOUT
                with self._lock:
                    self.timeouts += 1
                LOG.warning("oracle timed out after %ss (query %d)", cfg.timeout, index)
        if cfg.log_dir is not None:
            log_dir = Path(cfg.log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            (log_dir / f"query-{index:06d}.stdout").write_bytes(out or b"")
            (log_dir / f"query-{index:06d}.stderr").write_bytes(err or b"")
        return verdict


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def eval_external(
    elements: ElementList,
    config: ExternalOracleConfig,
    cache: QueryCache | None = None,
    oracle: ExternalOracle | None = None,
) -> tuple[Verdict, bool]:
    oracle = oracle or ExternalOracle(config)
    if cache is None:
        return oracle.evaluate(elements), False
    return cache.evaluate(oracle, elements)


@dataclass
class MinimalityReport:
    is_one_minimal: bool
    removable_ids: frozenset[int]
    evaluations: int


def check_one_minimal(
    elements: ElementList, oracle: PropertyOracle, cache: QueryCache | None = None
) -> MinimalityReport:
    """Try every single-element deletion from ``elements``."""

    def ask(v: ElementList) -> bool:
        if cache is None:
            return oracle.evaluate(v).holds
        return cache.evaluate(oracle, v)[0].holds

    if not ask(elements):
        raise PreconditionError("property does not hold on the list being checked")
    removable = frozenset(e.id for e in elements if ask(elements.without((e.id,))))
    return MinimalityReport(not removable, removable, len(elements))
