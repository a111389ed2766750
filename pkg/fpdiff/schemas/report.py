"""
Pydantic schemas for merge results and reports.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel

from fpdiff.core.entities.execution import OptLevel, RunStatus
from fpdiff.core.entities.outcome import DiscrepancyTag, OutcomeTag
from fpdiff.core.entities.precision import Precision
from fpdiff.schemas.metadata import SCHEMA_VERSION


class ComparisonSideModel(BaseModel):
    compiler_id: str
    opt_level: OptLevel
    outcome: str


class ComparisonModel(BaseModel):
    test_id: str
    input_index: int
    side_a: ComparisonSideModel
    side_b: ComparisonSideModel
    discrepancy: DiscrepancyTag
    direction: List[OutcomeTag]


class RunKeyModel(BaseModel):
    test_id: str
    input_index: int
    compiler_id: str
    opt_level: OptLevel


class UnavailableRunModel(RunKeyModel):
    side: str
    status: RunStatus


class MergeDocument(BaseModel):
    """The `merge` command's output file."""

    schema_version: int = SCHEMA_VERSION
    precision: Precision
    cross_level: bool = False
    runs_attempted: int = 0
    records: List[ComparisonModel] = []
    unmatched_a: List[RunKeyModel] = []
    unmatched_b: List[RunKeyModel] = []
    unavailable: List[UnavailableRunModel] = []


class LevelTable(BaseModel):
    counts: Dict[DiscrepancyTag, int]
    total: int
    compared: int
    subnormal: int


class ReportSummary(BaseModel):
    total_discrepancies: int
    total_runs: int
    percentage: str
    runs_attempted: int
    runs_compared: int
    unmatched: int = 0
    unavailable: int = 0
    total_programs: int = 0
    runs_per_option_per_compiler: int = 0


class Report(BaseModel):
    cross_level: bool = False
    levels: List[str]
    outcome_order: List[OutcomeTag]
    per_opt_table: Dict[str, LevelTable]
    adjacency: Dict[str, List[List[int]]]
    summary: ReportSummary
    precision: Optional[Precision] = None
