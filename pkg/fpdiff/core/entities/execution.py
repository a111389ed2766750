"""
Domain entities for sources, inputs and executions.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

from fpdiff.core.entities.outcome import Outcome
from fpdiff.core.entities.precision import Precision


class Dialect(str, Enum):
    """Source dialects the emitter can produce."""

    CUDA = "CUDA"
    HIP = "HIP"
    PORTABLE_C = "PortableC"

    @property
    def extension(self) -> str:
        return _EXTENSIONS[self]


_EXTENSIONS = {Dialect.CUDA: ".cu", Dialect.HIP: ".hip", Dialect.PORTABLE_C: ".c"}


@dataclass(frozen=True)
class SourceBundle:
    """Emitted source text of one test in one dialect."""

    test_id: str
    dialect: Dialect
    source_text: str
    precision: Precision

    @property
    def file_name(self) -> str:
        return f"{self.test_id}{self.dialect.extension}"


class OptLevel(str, Enum):
    """The five optimization configurations."""

    O0 = "O0"
    O1 = "O1"
    O2 = "O2"
    O3 = "O3"
    O3_FM = "O3_FM"


OPT_LEVEL_ORDER = tuple(OptLevel)


class ValueClass(str, Enum):
    """Input value classes, weighted toward exceptional magnitudes."""

    POS_ZERO = "PosZero"
    NEG_ZERO = "NegZero"
    SUBNORMAL = "Subnormal"
    SMALL_NORMAL = "SmallNormal"
    LARGE_NORMAL = "LargeNormal"
    MODERATE = "Moderate"


@dataclass(frozen=True)
class InputValue:
    param_name: str
    rendered: str
    value: Union[int, float]
    value_class: Optional[ValueClass] = None


@dataclass(frozen=True)
class InputVector:
    """One input record; values follow the kernel parameter order."""

    test_id: str
    values: Tuple[InputValue, ...]

    @property
    def argv(self) -> Tuple[str, ...]:
        return tuple(v.rendered for v in self.values)


class RunStatus(str, Enum):
    OK = "ok"
    COMPILE_ERROR = "compile_error"
    TIMEOUT = "timeout"
    RUNTIME_FAILURE = "runtime_failure"
    PARSE_ERROR = "parse_error"


@dataclass
class ExecutionRecord:
    """Result of running one binary on one input vector."""

    test_id: str
    input_index: int
    compiler_id: str
    opt_level: OptLevel
    raw_stdout: str = ""
    exit_status: int = 0
    wall_time: float = 0.0
    outcome: Optional[Outcome] = None
    status: RunStatus = RunStatus.OK
    diagnostics: str = field(default="", repr=False)

    @property
    def failed(self) -> bool:
        return self.status is not RunStatus.OK
