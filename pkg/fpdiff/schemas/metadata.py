"""
Pydantic schemas for the campaign metadata file.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from fpdiff.core.entities.execution import Dialect, OptLevel, RunStatus
from fpdiff.schemas.generation import GenConfig, InputSettings

SCHEMA_VERSION = 1


class PlatformInfo(BaseModel):
    hostname: str
    os_label: str
    compiler_versions: Dict[str, str] = {}


class CampaignConfig(BaseModel):
    """Snapshot of everything that determines test and input content."""

    generation: GenConfig
    inputs: InputSettings
    num_programs: int = Field(..., ge=0)
    start_index: int = Field(0, ge=0)
    dialects: List[Dialect]
    levels: List[OptLevel] = list(OptLevel)
    array_length: int = Field(10, ge=1)
    hipify: bool = False
    decimal_echo: bool = False


class SourceEntry(BaseModel):
    dialect: Dialect
    path: Optional[str] = None
    text: str


class ProgramEntry(BaseModel):
    test_id: str
    dialects: List[Dialect]
    sources: List[SourceEntry]
    ast: Dict[str, Any]
    inputs: List[List[str]]

    def source(self, dialect: Dialect) -> SourceEntry:
        for entry in self.sources:
            if entry.dialect is dialect:
                return entry
        raise KeyError(dialect)


class RunSummary(BaseModel):
    """One execution record as persisted; `outcome` is the canonical outcome text."""

    test_id: str
    input_index: int = Field(..., ge=0)
    compiler_id: str
    opt_level: OptLevel
    dialect: Dialect
    outcome: Optional[str] = None
    raw_stdout: str = ""
    status: RunStatus = RunStatus.OK
    exit_status: int = 0
    wall_time: float = 0.0


class CampaignMetadata(BaseModel):
    schema_version: int = SCHEMA_VERSION
    platform: PlatformInfo
    config: CampaignConfig
    tests: List[ProgramEntry] = []
    runs: List[RunSummary] = []
    skipped_dialects: List[Dialect] = []

    @model_validator(mode="after")
    def check_run_references(self) -> "CampaignMetadata":
        inputs_per_test = {t.test_id: len(t.inputs) for t in self.tests}
        for run in self.runs:
            count = inputs_per_test.get(run.test_id)
            if count is None:
                raise ValueError(f"Run references unknown test {run.test_id}")
            if run.input_index >= count:
                raise ValueError(
                    f"Run references input {run.input_index} of test {run.test_id}, which has {count}"
                )
        return self

    def program(self, test_id: str) -> ProgramEntry:
        for entry in self.tests:
            if entry.test_id == test_id:
                return entry
        raise KeyError(test_id)

    @property
    def failed_runs(self) -> int:
        return sum(1 for run in self.runs if run.status is not RunStatus.OK)
