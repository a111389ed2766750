"""
Pydantic schemas for the compiler registry.
"""
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, field_validator

from fpdiff.config import settings
from fpdiff.core.entities.execution import OptLevel


def default_opt_flags() -> Dict[OptLevel, List[str]]:
    return {
        OptLevel.O0: ["-O0"],
        OptLevel.O1: ["-O1"],
        OptLevel.O2: ["-O2"],
        OptLevel.O3: ["-O3"],
        OptLevel.O3_FM: ["-O3"],
    }


class CompilerSpec(BaseModel):
    """A registered compiler toolchain."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    command: str = Field(..., min_length=1)
    extra_args: List[str] = []
    extensions: List[str] = Field(..., min_length=1)
    fast_math_flag: str = "-ffast-math"
    opt_flag_map: Dict[OptLevel, List[str]] = Field(default_factory=default_opt_flags)
    output_args: List[str] = ["-o"]
    link_args: List[str] = []
    timeout: float = Field(default_factory=lambda: settings.DEFAULT_TIMEOUT, gt=0)

    @field_validator("extensions")
    @classmethod
    def normalize_extensions(cls, v: List[str]) -> List[str]:
        return [ext if ext.startswith(".") else f".{ext}" for ext in v]

    @field_validator("opt_flag_map")
    @classmethod
    def check_all_levels(cls, v: Dict[OptLevel, List[str]]) -> Dict[OptLevel, List[str]]:
        missing = [level.value for level in OptLevel if level not in v]
        if missing:
            raise ValueError(f"opt_flag_map is missing levels: {', '.join(missing)}")
        return v


class CompilerRegistry(BaseModel):
    """Registry file: a JSON array of compiler specs."""

    compilers: List[CompilerSpec]
