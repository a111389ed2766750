"""
Pydantic schemas for program and input generation settings.
"""
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from fpdiff.core.entities.execution import ValueClass
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import MATH_FUNCTIONS, base_function_name
from fpdiff.exceptions import ConfigurationError

STATEMENT_KINDS = ("temp", "accumulate", "array_store", "loop", "if")

DEFAULT_STATEMENT_WEIGHTS: Dict[str, float] = {
    "temp": 1.0,
    "accumulate": 3.0,
    "array_store": 1.0,
    "loop": 1.0,
    "if": 1.0,
}

DEFAULT_CLASS_WEIGHTS: Dict[ValueClass, float] = {
    ValueClass.MODERATE: 0.2,
    ValueClass.LARGE_NORMAL: 0.2,
    ValueClass.SMALL_NORMAL: 0.2,
    ValueClass.SUBNORMAL: 0.2,
    ValueClass.POS_ZERO: 0.1,
    ValueClass.NEG_ZERO: 0.1,
}


class GenConfig(BaseModel):
    """Program generator configuration."""

    model_config = ConfigDict(frozen=True)

    precision: Precision = Precision.FP64
    max_loop_nesting: int = Field(3, ge=0)
    max_stmts_per_block: int = Field(4, ge=0)
    num_fp_params: int = Field(8, ge=1)
    num_int_params: int = Field(1, ge=1)
    array_probability: float = Field(0.15, ge=0.0, le=1.0)
    math_fn_set: Tuple[str, ...] = MATH_FUNCTIONS
    math_probability: float = Field(0.2, ge=0.0, le=1.0)
    literal_probability: float = Field(0.35, ge=0.0, le=1.0)
    zero_literal_probability: float = Field(0.1, ge=0.0, le=1.0)
    literal_exponent_range: Optional[Tuple[int, int]] = None
    loop_bound_range: Tuple[int, int] = (1, 10)
    seed: int = Field(0, ge=0, le=2**64 - 1)
    max_expr_nodes: int = Field(6, ge=1)
    allow_nested_ifs: bool = False
    allow_multiply_accumulate: bool = True
    statement_weights: Dict[str, float] = Field(
        default_factory=lambda: dict(DEFAULT_STATEMENT_WEIGHTS)
    )

    @field_validator("math_fn_set", mode="before")
    @classmethod
    def normalize_math_functions(cls, v):
        """Accept any iterable of names, f-suffixed or not; store sorted base names."""
        if isinstance(v, str):
            v = [i.strip() for i in v.split(",") if i.strip()]
        names = sorted({base_function_name(name) for name in v})
        unknown = [name for name in names if name not in MATH_FUNCTIONS]
        if unknown:
            raise ValueError(f"Unsupported math functions: {', '.join(unknown)}")
        return tuple(names)

    @field_validator("statement_weights")
    @classmethod
    def check_statement_weights(cls, v: Dict[str, float]) -> Dict[str, float]:
        unknown = sorted(set(v) - set(STATEMENT_KINDS))
        if unknown:
            raise ValueError(f"Unknown statement kinds: {', '.join(unknown)}")
        if any(w < 0 for w in v.values()):
            raise ValueError("Statement weights must be non-negative")
        return {kind: float(v.get(kind, 0.0)) for kind in STATEMENT_KINDS}

    @model_validator(mode="after")
    def check_ranges(self) -> "GenConfig":
        low, high = self.precision.decimal_exponent_span
        if self.literal_exponent_range is not None:
            lo, hi = self.literal_exponent_range
            if lo > hi or lo < low or hi > high:
                raise ValueError(
                    f"literal_exponent_range {self.literal_exponent_range} must lie in "
                    f"[{low}, {high}] for {self.precision.value}"
                )
        lo, hi = self.loop_bound_range
        if lo < 1 or lo > hi:
            raise ValueError(f"loop_bound_range {self.loop_bound_range} must be a positive interval")
        if self.math_probability > 0 and not self.math_fn_set:
            raise ValueError("math_fn_set is empty while math_probability > 0")
        return self

    @property
    def exponent_range(self) -> Tuple[int, int]:
        return self.literal_exponent_range or self.precision.decimal_exponent_span

    @property
    def array_length(self) -> int:
        return self.loop_bound_range[1]


class InputSettings(BaseModel):
    """Input vector generation settings."""

    model_config = ConfigDict(frozen=True)

    count: int = Field(10, ge=0)
    seed: int = Field(0, ge=0)
    class_weights: Dict[ValueClass, float] = Field(
        default_factory=lambda: dict(DEFAULT_CLASS_WEIGHTS)
    )

    @field_validator("class_weights")
    @classmethod
    def check_class_weights(cls, v: Dict[ValueClass, float]) -> Dict[ValueClass, float]:
        if any(w < 0 for w in v.values()):
            raise ValueError("Class weights must be non-negative")
        if not any(w > 0 for w in v.values()):
            raise ValueError("At least one class weight must be positive")
        return v


def make_gen_config(**kwargs) -> GenConfig:
    """Build a GenConfig, reporting invalid values as a configuration error."""
    try:
        return GenConfig(**kwargs)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid generator configuration: {e}") from e


def make_input_settings(**kwargs) -> InputSettings:
    try:
        return InputSettings(**kwargs)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid input settings: {e}") from e
