"""
Cross-platform comparison domain entities.
"""
from dataclasses import dataclass, field
from typing import List

from fpdiff.core.entities.execution import OptLevel, RunStatus
from fpdiff.core.entities.outcome import DiscrepancyClass, Outcome
from fpdiff.core.entities.precision import Precision


@dataclass(frozen=True)
class ComparisonSide:
    compiler_id: str
    opt_level: OptLevel
    outcome: Outcome


@dataclass(frozen=True)
class ComparisonRecord:
    """Two outcomes of the same test and input, one from each side."""

    test_id: str
    input_index: int
    side_a: ComparisonSide
    side_b: ComparisonSide
    discrepancy: DiscrepancyClass

    @property
    def opt_level(self) -> OptLevel:
        return self.side_a.opt_level

    @property
    def level_label(self) -> str:
        if self.side_a.opt_level is self.side_b.opt_level:
            return self.side_a.opt_level.value
        return f"{self.side_a.opt_level.value}:{self.side_b.opt_level.value}"


@dataclass(frozen=True)
class RunKey:
    test_id: str
    input_index: int
    compiler_id: str
    opt_level: OptLevel


@dataclass(frozen=True)
class UnavailableRun:
    """A run that produced no comparable outcome."""

    side: str
    key: RunKey
    status: RunStatus


@dataclass
class MergeResult:
    precision: Precision
    records: List[ComparisonRecord] = field(default_factory=list)
    unmatched_a: List[RunKey] = field(default_factory=list)
    unmatched_b: List[RunKey] = field(default_factory=list)
    unavailable: List[UnavailableRun] = field(default_factory=list)
    runs_attempted: int = 0
    cross_level: bool = False
