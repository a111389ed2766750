"""
Domain entities for run outcomes and discrepancy classes.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from fpdiff.core.numerics import format_hex


class OutcomeTag(str, Enum):
    """Category of a printed result."""

    NAN = "NaN"
    INF = "Inf"
    ZERO = "Zero"
    NUMBER = "Number"


# Row/column order of adjacency matrices.
OUTCOME_ORDER = (OutcomeTag.NAN, OutcomeTag.INF, OutcomeTag.ZERO, OutcomeTag.NUMBER)


class Sign(str, Enum):
    POSITIVE = "+"
    NEGATIVE = "-"


@dataclass(frozen=True)
class Outcome:
    """Categorized result of one run."""

    tag: OutcomeTag
    sign: Sign = Sign.POSITIVE
    value: Optional[float] = None
    subnormal: bool = False

    def render(self) -> str:
        """Canonical text, parseable back by the classifier."""
        negative = self.sign is Sign.NEGATIVE
        if self.tag is OutcomeTag.NAN:
            return "-nan" if negative else "nan"
        if self.tag is OutcomeTag.INF:
            return "-inf" if negative else "inf"
        if self.tag is OutcomeTag.ZERO:
            return "-0x0p+0" if negative else "0x0p+0"
        return format_hex(self.value)


class DiscrepancyTag(str, Enum):
    """The seven discrepancy classes plus Consistent."""

    NAN_VS_INF = "NaN_vs_Inf"
    NAN_VS_ZERO = "NaN_vs_Zero"
    NAN_VS_NUM = "NaN_vs_Num"
    INF_VS_ZERO = "Inf_vs_Zero"
    INF_VS_NUM = "Inf_vs_Num"
    NUM_VS_ZERO = "Num_vs_Zero"
    NUM_VS_NUM = "Num_vs_Num"
    CONSISTENT = "Consistent"


DISCREPANCY_ORDER = tuple(t for t in DiscrepancyTag if t is not DiscrepancyTag.CONSISTENT)


@dataclass(frozen=True)
class DiscrepancyClass:
    """Class of an outcome pair; direction keeps which side produced which tag."""

    tag: DiscrepancyTag
    direction: Tuple[OutcomeTag, OutcomeTag]

    @property
    def is_discrepancy(self) -> bool:
        return self.tag is not DiscrepancyTag.CONSISTENT
