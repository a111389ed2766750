"""
Tests for bit-exact float conversions.
"""
import math

import numpy as np
import pytest

from fpdiff.core.entities.precision import Precision
from fpdiff.core.numerics import float_bits, format_hex, is_subnormal, parse_decimal, round_to_precision


class TestFormatHex:
    """Hexfloat rendering in printf("%a") style."""

    @pytest.mark.parametrize(
        "value, expected",
        [
            (3.0, "0x1.8p+1"),
            (1.0, "0x1p+0"),
            (-0.5, "-0x1p-1"),
            (0.0, "0x0p+0"),
            (-0.0, "-0x0p+0"),
            (math.inf, "inf"),
            (-math.inf, "-inf"),
            (5e-324, "0x0.0000000000001p-1022"),
        ],
    )
    def test_format(self, value, expected):
        """Test hexfloat text for normal, zero, infinite and subnormal values."""
        assert format_hex(value) == expected

    def test_nan_keeps_sign(self):
        """Test that NaN renders with its sign bit."""
        assert format_hex(math.nan) == "nan"
        assert format_hex(-math.nan) == "-nan"

    def test_parses_back_exactly(self):
        """Test that hexfloat text parses back to the same value."""
        value = 8.6551990944767196e-306
        assert float.fromhex(format_hex(value)) == value


class TestDecimalParsing:
    """Decimal literal parsing per precision."""

    def test_fp64_matches_float(self):
        """Test that FP64 parsing agrees with float()."""
        assert parse_decimal("+1.3305E12", Precision.FP64) == 1.3305e12

    def test_fp32_is_correctly_rounded(self):
        """Test that FP32 parsing rounds like numpy.float32."""
        assert parse_decimal("0.1", Precision.FP32) == float(np.float32(0.1))

    def test_fp32_suffix_is_ignored(self):
        """Test that a trailing F suffix is accepted."""
        assert parse_decimal("1.5F", Precision.FP32) == 1.5

    def test_fp32_double_rounding_midpoint(self):
        """Test that a binary32 midpoint reached through binary64 still rounds correctly."""
        # Just above 1 + 2^-24; the nearest binary64 is the binary32 midpoint itself.
        text = "1.0000000596046447753993079842642"
        assert parse_decimal(text, Precision.FP32) == float(np.nextafter(np.float32(1.0), np.float32(2.0)))

    def test_fp32_overflow(self):
        """Test that decimals past the binary32 range parse to infinity."""
        assert parse_decimal("1.0E39", Precision.FP32) == math.inf

    def test_round_to_precision(self):
        """Test rounding a binary64 value into each precision."""
        assert round_to_precision(1e-50, Precision.FP32) == 0.0
        assert round_to_precision(1e-50, Precision.FP64) == 1e-50


class TestBits:
    """Raw bit patterns and subnormal detection."""

    def test_float_bits(self):
        """Test raw bit patterns of both precisions."""
        assert float_bits(1.0, Precision.FP64) == 0x3FF0000000000000
        assert float_bits(1.0, Precision.FP32) == 0x3F800000
        assert float_bits(-0.0, Precision.FP64) == 1 << 63

    def test_subnormal_threshold_fp64(self):
        """Test the FP64 subnormal boundary."""
        assert is_subnormal(1e-320, Precision.FP64)
        assert not is_subnormal(1e-300, Precision.FP64)
        assert not is_subnormal(2.0 ** -1022, Precision.FP64)
        assert is_subnormal(math.nextafter(2.0 ** -1022, 0.0), Precision.FP64)

    def test_subnormal_threshold_fp32(self):
        """Test the FP32 subnormal boundary."""
        assert is_subnormal(1e-40, Precision.FP32)
        assert not is_subnormal(2.0 ** -126, Precision.FP32)

    def test_zero_is_not_subnormal(self):
        """Test that zero is not flagged subnormal."""
        assert not is_subnormal(0.0, Precision.FP64)
