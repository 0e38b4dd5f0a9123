"""Delta-debugging reducers (ddmin, ProbDD, CDD) with query telemetry and benchmarking."""

__version__ = "0.1.0"

from .cdd import cdd_reduce, compute_size
from .core import Element, ElementList, Granularity, ReductionOutcome, content_digest, reassemble, segment
from .ddmin import ddmin_reduce
from .fixpoint import ALGORITHMS, fixpoint_reduce, run_algorithm
from .oracle import (
    ExternalOracle,
    ExternalOracleConfig,
    OracleUnavailableError,
    PreconditionError,
    PropertyOracle,
    QueryCache,
    ReductionError,
    Verdict,
    check_one_minimal,
    planted_oracle,
    table_oracle,
)
from .probdd import ProbState, probdd_reduce
from .telemetry import Category, TelemetrySink

__all__ = [
    "ALGORITHMS",
    "Category",
    "Element",
    "ElementList",
    "ExternalOracle",
    "ExternalOracleConfig",
    "Granularity",
    "OracleUnavailableError",
    "PreconditionError",
    "ProbState",
    "PropertyOracle",
    "QueryCache",
    "ReductionError",
    "ReductionOutcome",
    "TelemetrySink",
    "Verdict",
    "cdd_reduce",
    "check_one_minimal",
    "compute_size",
    "content_digest",
    "ddmin_reduce",
    "fixpoint_reduce",
    "planted_oracle",
    "probdd_reduce",
    "reassemble",
    "run_algorithm",
    "segment",
    "table_oracle",
]
