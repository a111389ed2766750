"""
Bit-exact conversions between decimal text, hexfloat text and binary floats.
"""
import math
import struct
from fractions import Fraction

import numpy as np

from fpdiff.core.entities.precision import Precision


def _decimal_to_float32(text: str) -> float:
    """Correctly rounded decimal -> binary32 conversion.

    Going through binary64 first is exact except when the binary64 value lands
    on a binary32 rounding midpoint; that case is settled with exact rationals.
    """
    d = float(text)
    with np.errstate(over="ignore"):
        f = np.float32(d)
    if not np.isfinite(f) or float(f) == d:
        return float(f)
    if float(f) < d:
        lo, hi = f, np.nextafter(f, np.float32(np.inf))
    else:
        lo, hi = np.nextafter(f, np.float32(-np.inf)), f
    mid = (Fraction(float(lo)) + Fraction(float(hi))) / 2
    if Fraction(d) != mid:
        return float(f)
    exact = Fraction(text)
    if exact == mid:
        return float(f)
    return float(hi) if exact > mid else float(lo)


def parse_decimal(text: str, precision: Precision) -> float:
    """Parse a C floating literal body (no suffix) with the precision's rounding."""
    body = text.rstrip("fF")
    if precision is Precision.FP64:
        return float(body)
    return _decimal_to_float32(body)


def round_to_precision(value: float, precision: Precision) -> float:
    if precision is Precision.FP64:
        return float(value)
    with np.errstate(over="ignore"):
        return float(np.float32(value))


def format_hex(value: float) -> str:
    """Render a float the way C's printf("%a") does on glibc."""
    if math.isnan(value):
        return "-nan" if math.copysign(1.0, value) < 0 else "nan"
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    if value == 0.0:
        return "-0x0p+0" if math.copysign(1.0, value) < 0 else "0x0p+0"
    text = float(value).hex()
    mantissa, exponent = text.split("p")
    if "." in mantissa:
        mantissa = mantissa.rstrip("0").rstrip(".")
    return f"{mantissa}p{exponent}"


def float_bits(value: float, precision: Precision) -> int:
    """Raw IEEE-754 bit pattern of a value stored in the given precision."""
    if precision is Precision.FP64:
        return struct.unpack(">Q", struct.pack(">d", value))[0]
    return struct.unpack(">I", struct.pack(">f", value))[0]


def is_subnormal(value: float, precision: Precision) -> bool:
    return 0.0 < abs(value) < precision.smallest_normal
