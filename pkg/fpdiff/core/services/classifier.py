"""
Outcome categorization and discrepancy classification.
"""
import math
from typing import Optional

from fpdiff.core.entities.outcome import DiscrepancyClass, DiscrepancyTag, Outcome, OutcomeTag, Sign
from fpdiff.core.entities.precision import Precision
from fpdiff.core.numerics import is_subnormal, parse_decimal, round_to_precision
from fpdiff.exceptions import OutcomeParseError

_PAIR_CLASSES = {
    frozenset({OutcomeTag.NAN, OutcomeTag.INF}): DiscrepancyTag.NAN_VS_INF,
    frozenset({OutcomeTag.NAN, OutcomeTag.ZERO}): DiscrepancyTag.NAN_VS_ZERO,
    frozenset({OutcomeTag.NAN, OutcomeTag.NUMBER}): DiscrepancyTag.NAN_VS_NUM,
    frozenset({OutcomeTag.INF, OutcomeTag.ZERO}): DiscrepancyTag.INF_VS_ZERO,
    frozenset({OutcomeTag.INF, OutcomeTag.NUMBER}): DiscrepancyTag.INF_VS_NUM,
    frozenset({OutcomeTag.NUMBER, OutcomeTag.ZERO}): DiscrepancyTag.NUM_VS_ZERO,
}


def categorize(value: float, precision: Precision = Precision.FP64) -> Outcome:
    """Outcome of a value already stored in the given precision."""
    sign = Sign.NEGATIVE if math.copysign(1.0, value) < 0 else Sign.POSITIVE
    if math.isnan(value):
        return Outcome(OutcomeTag.NAN, sign)
    if math.isinf(value):
        return Outcome(OutcomeTag.INF, sign)
    if value == 0.0:
        return Outcome(OutcomeTag.ZERO, sign)
    return Outcome(OutcomeTag.NUMBER, sign, float(value), is_subnormal(value, precision))


def parse_outcome(stdout_line: str, precision: Precision = Precision.FP64) -> Outcome:
    """Categorize the single line a test binary prints.

    Only the first field is read; a decimal echo after the hexfloat is ignored.
    """
    fields = stdout_line.split()
    if not fields:
        raise OutcomeParseError(stdout_line)
    token = fields[0]
    lowered = token.lower()
    negative = lowered.startswith("-")
    unsigned = lowered.lstrip("+-")

    if unsigned in ("inf", "infinity"):
        return Outcome(OutcomeTag.INF, Sign.NEGATIVE if negative else Sign.POSITIVE)
    if unsigned.startswith("nan"):
        return Outcome(OutcomeTag.NAN, Sign.NEGATIVE if negative else Sign.POSITIVE)

    try:
        if unsigned.startswith("0x"):
            value = round_to_precision(float.fromhex(token), precision)
        else:
            value = parse_decimal(token, precision)
    except ValueError:
        raise OutcomeParseError(stdout_line) from None
    if "_" in token:
        raise OutcomeParseError(stdout_line)
    return categorize(value, precision)


def numbers_equal(a: float, b: float, relative_epsilon: Optional[float] = None) -> bool:
    if relative_epsilon is None:
        # Both operands are finite and nonzero, so == is bit equality here.
        return a == b
    return abs(a - b) <= relative_epsilon * max(abs(a), abs(b))


def compare_outcomes(
    a: Outcome, b: Outcome, relative_epsilon: Optional[float] = None
) -> DiscrepancyClass:
    """Classify an outcome pair; sign-only differences are not discrepancies."""
    direction = (a.tag, b.tag)
    if a.tag is b.tag:
        if a.tag is OutcomeTag.NUMBER and not numbers_equal(a.value, b.value, relative_epsilon):
            return DiscrepancyClass(DiscrepancyTag.NUM_VS_NUM, direction)
        return DiscrepancyClass(DiscrepancyTag.CONSISTENT, direction)
    return DiscrepancyClass(_PAIR_CLASSES[frozenset(direction)], direction)
