"""
Input vector generation weighted toward exceptional magnitudes.
"""
import math
import random
from typing import Dict, List, Mapping, Optional, Tuple, Union

import structlog

from fpdiff.core.entities.execution import InputValue, InputVector, ValueClass
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import ParamKind, ProgramAst
from fpdiff.core.numerics import parse_decimal
from fpdiff.core.services.program_generator import LEADING_DIGIT, ast_signature
from fpdiff.exceptions import ConfigurationError
from fpdiff.schemas.generation import DEFAULT_CLASS_WEIGHTS

logger = structlog.get_logger()


# Decimal exponent windows to draw from; samples are then filtered by the class predicate.
_CLASS_EXPONENTS: Dict[Precision, Dict[ValueClass, Tuple[int, int]]] = {
    Precision.FP64: {
        ValueClass.SUBNORMAL: (-323, -308),
        ValueClass.SMALL_NORMAL: (-308, -291),
        ValueClass.LARGE_NORMAL: (300, 308),
        ValueClass.MODERATE: (-10, 10),
    },
    Precision.FP32: {
        ValueClass.SUBNORMAL: (-45, -38),
        ValueClass.SMALL_NORMAL: (-38, -31),
        ValueClass.LARGE_NORMAL: (30, 38),
        ValueClass.MODERATE: (-10, 10),
    },
}

_SMALL_NORMAL_LIMIT = {Precision.FP64: 1e-290, Precision.FP32: 1e-30}
_LARGE_NORMAL_LIMIT = {Precision.FP64: 1e300, Precision.FP32: 1e30}
_MAX_ATTEMPTS = 256


def in_value_class(value: float, value_class: ValueClass, precision: Precision) -> bool:
    """Membership predicate of each value class."""
    magnitude = abs(value)
    negative = math.copysign(1.0, value) < 0
    if value_class is ValueClass.POS_ZERO:
        return value == 0.0 and not negative
    if value_class is ValueClass.NEG_ZERO:
        return value == 0.0 and negative
    if not math.isfinite(value):
        return False
    if value_class is ValueClass.SUBNORMAL:
        return 0.0 < magnitude < precision.smallest_normal
    if value_class is ValueClass.SMALL_NORMAL:
        return precision.smallest_normal <= magnitude < _SMALL_NORMAL_LIMIT[precision]
    if value_class is ValueClass.LARGE_NORMAL:
        return magnitude > _LARGE_NORMAL_LIMIT[precision]
    return 1e-10 <= magnitude <= 1e10


def render_fp_input(sign: str, mantissa: str, exponent: int) -> str:
    return f"{sign}{mantissa}E{exponent}"


def parse_input_value(text: str, kind: ParamKind, precision: Precision) -> Union[int, float]:
    """Numeric value a compiled harness reads from one argv entry."""
    if kind is ParamKind.INT_SCALAR:
        return int(text)
    return parse_decimal(text, precision)


def sample_value(value_class: ValueClass, precision: Precision, rng: random.Random) -> Tuple[str, float]:
    """Draw one rendered FP input of the requested class."""
    if value_class is ValueClass.POS_ZERO:
        return "+0.0", 0.0
    if value_class is ValueClass.NEG_ZERO:
        return "-0.0", -0.0
    lo, hi = _CLASS_EXPONENTS[precision][value_class]
    for _ in range(_MAX_ATTEMPTS):
        sign = rng.choice("+-")
        mantissa = f"{LEADING_DIGIT}.{rng.randrange(10_000):04d}"
        rendered = render_fp_input(sign, mantissa, rng.randint(lo, hi))
        value = parse_decimal(rendered, precision)
        if in_value_class(value, value_class, precision):
            return rendered, value
    raise ConfigurationError(f"Cannot sample a {value_class.value} value for {precision.value}")


def _check_weights(class_weights: Mapping[ValueClass, float]) -> None:
    if any(w < 0 for w in class_weights.values()):
        raise ConfigurationError("Class weights must be non-negative", {"weights": dict(class_weights)})
    if not any(w > 0 for w in class_weights.values()):
        raise ConfigurationError("At least one class weight must be positive")


def generate_input_vectors(
    ast: ProgramAst,
    count: int,
    seed: int,
    class_weights: Optional[Mapping[ValueClass, float]] = None,
    loop_bound_range: Tuple[int, int] = (1, 10),
    test_id: Optional[str] = None,
) -> List[InputVector]:
    """Input vectors for a program; deterministic in (signature, seed)."""
    weights = dict(DEFAULT_CLASS_WEIGHTS if class_weights is None else class_weights)
    _check_weights(weights)
    if count <= 0:
        return []

    signature = test_id or ast_signature(ast)
    rng = random.Random(f"{signature}:{seed}")
    classes = [c for c, w in weights.items() if w > 0]
    class_weight_list = [weights[c] for c in classes]

    vectors = []
    for _ in range(count):
        values = []
        for param in ast.params:
            if param.kind is ParamKind.INT_SCALAR:
                bound = rng.randint(*loop_bound_range)
                values.append(InputValue(param.name, str(bound), bound))
                continue
            value_class = rng.choices(classes, weights=class_weight_list)[0]
            rendered, value = sample_value(value_class, ast.precision, rng)
            values.append(InputValue(param.name, rendered, value, value_class))
        vectors.append(InputVector(test_id=signature, values=tuple(values)))

    logger.debug("Inputs generated", test_id=signature, count=count)
    return vectors


def input_vector_from_strings(
    ast: ProgramAst, test_id: str, rendered: List[str]
) -> InputVector:
    """Rebuild an input vector from its argv strings (metadata replay)."""
    if len(rendered) != len(ast.params):
        raise ConfigurationError(
            f"Input has {len(rendered)} values, program {test_id} takes {len(ast.params)}"
        )
    values = tuple(
        InputValue(p.name, text, parse_input_value(text, p.kind, ast.precision))
        for p, text in zip(ast.params, rendered)
    )
    return InputVector(test_id=test_id, values=values)
