"""
Reference interpreter with strict IEEE-754 semantics.
"""
import ctypes
import ctypes.util
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog

from fpdiff.core.entities.execution import InputVector
from fpdiff.core.entities.outcome import Outcome
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import (
    COMP,
    Accumulate,
    ArrayRef,
    ArrayStore,
    BinOp,
    CompRef,
    Expr,
    ForLoop,
    IfBlock,
    Literal,
    MathCall,
    ParamKind,
    Paren,
    PrintComp,
    ProgramAst,
    Stmt,
    TempDecl,
    VarRef,
    base_function_name,
)
from fpdiff.core.services.classifier import categorize
from fpdiff.core.services.emitter import DEFAULT_ARRAY_LENGTH
from fpdiff.exceptions import EvaluationError

logger = structlog.get_logger()

Scalar = Union[np.float32, np.float64]

_NUMPY_FUNCTIONS: Dict[str, Callable] = {
    "cos": np.cos,
    "sin": np.sin,
    "sqrt": np.sqrt,
    "ceil": np.ceil,
    "floor": np.floor,
    "fabs": np.fabs,
    "cosh": np.cosh,
    "exp": np.exp,
    "log": np.log,
    "tanh": np.tanh,
    "asin": np.arcsin,
    "acos": np.arccos,
    "atan": np.arctan,
    "fmod": np.fmod,
    "pow": np.power,
}

_COMPARE = {
    "==": lambda a, b: a == b,
    ">": lambda a, b: a > b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    "<=": lambda a, b: a <= b,
    "!=": lambda a, b: a != b,
}


class MathBackend:
    """Provider of the catalog's math functions."""

    name = "abstract"

    def call(self, fn_name: str, args: Tuple[Scalar, ...], dtype) -> Scalar:
        raise NotImplementedError


class NumpyMathBackend(MathBackend):
    name = "numpy"

    def call(self, fn_name: str, args: Tuple[Scalar, ...], dtype) -> Scalar:
        return dtype(_NUMPY_FUNCTIONS[base_function_name(fn_name)](*args))


class LibmMathBackend(MathBackend):
    """Host C math library loaded through ctypes."""

    name = "libm"

    def __init__(self, library: Optional[str] = None):
        path = library or ctypes.util.find_library("m")
        if path is None:
            raise OSError("host math library not found")
        self._lib = ctypes.CDLL(path)
        self._functions: Dict[str, Callable] = {}

    def _function(self, c_name: str, arity: int, single: bool) -> Callable:
        fn = self._functions.get(c_name)
        if fn is None:
            c_type = ctypes.c_float if single else ctypes.c_double
            fn = getattr(self._lib, c_name)
            fn.restype = c_type
            fn.argtypes = [c_type] * arity
            self._functions[c_name] = fn
        return fn

    def call(self, fn_name: str, args: Tuple[Scalar, ...], dtype) -> Scalar:
        single = dtype is np.float32
        c_name = base_function_name(fn_name) + ("f" if single else "")
        fn = self._function(c_name, len(args), single)
        return dtype(fn(*(float(a) for a in args)))


def get_math_backend(name: str = "libm") -> MathBackend:
    if name == "numpy":
        return NumpyMathBackend()
    try:
        return LibmMathBackend()
    except OSError as e:
        logger.warning("Host libm unavailable, using numpy math", error=str(e))
        return NumpyMathBackend()


@dataclass
class EvalEnv:
    """Bindings and arithmetic mode of one evaluation."""

    precision: Precision
    math_backend: MathBackend
    bindings: Dict[str, Union[Scalar, int, List[Scalar]]] = field(default_factory=dict)
    widen_intermediates: bool = False

    @property
    def storage_type(self):
        return self.precision.dtype

    @property
    def compute_type(self):
        # Widened mode evaluates in binary64 and rounds only when storing.
        return np.float64 if self.widen_intermediates else self.precision.dtype

    def store(self, value: Scalar) -> Scalar:
        return self.storage_type(value)


class Interpreter:
    """Evaluates programs statement by statement, every operation rounded once."""

    def __init__(self, math_backend: Optional[MathBackend] = None, array_length: int = DEFAULT_ARRAY_LENGTH):
        self.math_backend = math_backend or get_math_backend()
        self.array_length = array_length

    def interpret(
        self, ast: ProgramAst, input_vector: InputVector, widen_intermediates: bool = False
    ) -> Tuple[float, Outcome]:
        env = EvalEnv(
            precision=ast.precision,
            math_backend=self.math_backend,
            widen_intermediates=widen_intermediates,
        )
        self._bind_inputs(ast, input_vector, env)
        with np.errstate(all="ignore"):
            self._block(ast.body, env)
        final = float(env.bindings[COMP])
        return final, categorize(final, ast.precision)

    def _bind_inputs(self, ast: ProgramAst, input_vector: InputVector, env: EvalEnv) -> None:
        if len(input_vector.values) != len(ast.params):
            raise EvaluationError(
                f"Input has {len(input_vector.values)} values, kernel takes {len(ast.params)}"
            )
        for param, item in zip(ast.params, input_vector.values):
            if param.kind is ParamKind.INT_SCALAR:
                env.bindings[param.name] = int(item.value)
            elif param.kind is ParamKind.FP_ARRAY:
                env.bindings[param.name] = [env.store(item.value)] * self.array_length
            else:
                env.bindings[param.name] = env.store(item.value)

    def _lookup(self, name: str, env: EvalEnv):
        try:
            return env.bindings[name]
        except KeyError:
            raise EvaluationError(f"Unbound variable {name}") from None

    def _block(self, body: Tuple[Stmt, ...], env: EvalEnv) -> None:
        for stmt in body:
            self._statement(stmt, env)

    def _statement(self, stmt: Stmt, env: EvalEnv) -> None:
        if isinstance(stmt, TempDecl):
            env.bindings[stmt.name] = env.store(self._expr(stmt.init, env))
        elif isinstance(stmt, Accumulate):
            # comp op= e is comp = comp op (e)
            comp = env.compute_type(self._lookup(COMP, env))
            rhs = self._expr(stmt.rhs, env)
            env.bindings[COMP] = env.store(self._binary(stmt.op[0], comp, rhs, env))
        elif isinstance(stmt, ArrayStore):
            array = self._lookup(stmt.array_name, env)
            index = self._index(stmt.index_var, array, env)
            array[index] = env.store(self._expr(stmt.rhs, env))
        elif isinstance(stmt, ForLoop):
            bound = self._lookup(stmt.bound_param, env)
            if not isinstance(bound, int):
                raise EvaluationError(f"Loop bound {stmt.bound_param} is not an integer")
            for i in range(bound):
                env.bindings[stmt.induction_var] = i
                self._block(stmt.body, env)
            env.bindings.pop(stmt.induction_var, None)
        elif isinstance(stmt, IfBlock):
            lhs = self._expr(stmt.lhs, env)
            rhs = self._expr(stmt.rhs, env)
            if _COMPARE[stmt.cmp](lhs, rhs):
                self._block(stmt.body, env)
        elif not isinstance(stmt, PrintComp):
            raise EvaluationError(f"Unknown statement {type(stmt).__name__}")

    def _index(self, index_var: str, array, env: EvalEnv) -> int:
        index = self._lookup(index_var, env)
        if not isinstance(array, list) or not isinstance(index, int):
            raise EvaluationError(f"Bad array access with index {index_var}")
        if not 0 <= index < len(array):
            raise EvaluationError(f"Array index {index} out of bounds")
        return index

    def _binary(self, op: str, lhs: Scalar, rhs: Scalar, env: EvalEnv) -> Scalar:
        if op == "+":
            return lhs + rhs
        if op == "-":
            return lhs - rhs
        if op == "*":
            return lhs * rhs
        if op == "/":
            return lhs / rhs
        raise EvaluationError(f"Unknown operator {op}")

    def _expr(self, expr: Expr, env: EvalEnv) -> Scalar:
        ctype = env.compute_type
        if isinstance(expr, Literal):
            return ctype(expr.value)
        if isinstance(expr, CompRef):
            return ctype(self._lookup(COMP, env))
        if isinstance(expr, VarRef):
            value = self._lookup(expr.name, env)
            if isinstance(value, list):
                raise EvaluationError(f"Array {expr.name} used as a scalar")
            return ctype(value)
        if isinstance(expr, ArrayRef):
            array = self._lookup(expr.array_name, env)
            return ctype(array[self._index(expr.index_var, array, env)])
        if isinstance(expr, Paren):
            return self._expr(expr.inner, env)
        if isinstance(expr, BinOp):
            return ctype(self._binary(expr.op, self._expr(expr.lhs, env), self._expr(expr.rhs, env), env))
        if isinstance(expr, MathCall):
            args = tuple(self._expr(a, env) for a in expr.args)
            return env.math_backend.call(expr.fn_name, args, ctype)
        raise EvaluationError(f"Unknown expression {type(expr).__name__}")


def interpret(
    ast: ProgramAst,
    input_vector: InputVector,
    math_backend: Optional[MathBackend] = None,
    array_length: int = DEFAULT_ARRAY_LENGTH,
    widen_intermediates: bool = False,
) -> Tuple[float, Outcome]:
    """Evaluate a program on one input; returns the final comp and its outcome."""
    return Interpreter(math_backend, array_length).interpret(ast, input_vector, widen_intermediates)
