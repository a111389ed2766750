"""
Floating-point precision modes.
"""
import sys
from enum import Enum
from typing import Tuple

import numpy as np


class Precision(str, Enum):
    """Arithmetic precision of a generated program."""

    FP64 = "FP64"
    FP32 = "FP32"

    @property
    def c_type(self) -> str:
        return "double" if self is Precision.FP64 else "float"

    @property
    def dtype(self):
        return np.float64 if self is Precision.FP64 else np.float32

    @property
    def smallest_normal(self) -> float:
        if self is Precision.FP64:
            return sys.float_info.min
        return float(np.finfo(np.float32).tiny)

    @property
    def largest_finite(self) -> float:
        if self is Precision.FP64:
            return sys.float_info.max
        return float(np.finfo(np.float32).max)

    @property
    def decimal_exponent_span(self) -> Tuple[int, int]:
        """Decimal exponents whose d.dddd literals are nonzero and finite for some mantissa."""
        if self is Precision.FP64:
            return (-323, 308)
        return (-45, 38)

    @property
    def math_suffix(self) -> str:
        return "" if self is Precision.FP64 else "f"

    @property
    def literal_suffix(self) -> str:
        return "" if self is Precision.FP64 else "F"
