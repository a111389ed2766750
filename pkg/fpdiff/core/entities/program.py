"""
Domain entities for generated kernel programs.
"""
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Dict, Iterator, Optional, Tuple, Union

from fpdiff.core.entities.precision import Precision
from fpdiff.core.numerics import parse_decimal

KERNEL_NAME = "compute"
COMP = "comp"

BINARY_OPS = ("+", "-", "*", "/")
ACCUMULATE_OPS = ("+=", "-=", "*=")
COMPARATORS = ("==", ">", "<", ">=", "<=")

ONE_ARG_FUNCTIONS = (
    "cos", "sin", "sqrt", "ceil", "floor", "fabs", "cosh",
    "exp", "log", "tanh", "asin", "acos", "atan",
)
TWO_ARG_FUNCTIONS = ("fmod", "pow")
MATH_FUNCTIONS = ONE_ARG_FUNCTIONS + TWO_ARG_FUNCTIONS


def math_arity(fn_name: str) -> int:
    """Argument count of a catalog function, accepting the f-suffixed spelling."""
    base = base_function_name(fn_name)
    if base in ONE_ARG_FUNCTIONS:
        return 1
    if base in TWO_ARG_FUNCTIONS:
        return 2
    raise KeyError(fn_name)


def base_function_name(fn_name: str) -> str:
    if fn_name not in MATH_FUNCTIONS and fn_name.endswith("f") and fn_name[:-1] in MATH_FUNCTIONS:
        return fn_name[:-1]
    return fn_name


class ParamKind(str, Enum):
    """Kernel parameter kinds."""

    COMP_ACCUMULATOR = "CompAccumulator"
    INT_SCALAR = "IntScalar"
    FP_SCALAR = "FpScalar"
    FP_ARRAY = "FpArray"


@dataclass(frozen=True)
class Param:
    """Kernel parameter."""

    name: str
    kind: ParamKind


@dataclass(frozen=True)
class Literal:
    """Floating-point literal in the ``[+-]d.ddddE[+-]?n`` form."""

    sign: str
    mantissa: str
    exponent: int
    precision: Precision = Precision.FP64

    def render(self) -> str:
        return f"{self.sign}{self.mantissa}E{self.exponent}{self.precision.literal_suffix}"

    @property
    def value(self) -> float:
        return parse_decimal(f"{self.sign}{self.mantissa}E{self.exponent}", self.precision)


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class ArrayRef:
    array_name: str
    index_var: str


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Paren:
    inner: "Expr"


@dataclass(frozen=True)
class MathCall:
    fn_name: str
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class CompRef:
    pass


Expr = Union[Literal, VarRef, ArrayRef, BinOp, Paren, MathCall, CompRef]


@dataclass(frozen=True)
class TempDecl:
    name: str
    init: Expr


@dataclass(frozen=True)
class Accumulate:
    op: str
    rhs: Expr


@dataclass(frozen=True)
class ArrayStore:
    array_name: str
    index_var: str
    rhs: Expr


@dataclass(frozen=True)
class ForLoop:
    bound_param: str
    induction_var: str
    body: Tuple["Stmt", ...]


@dataclass(frozen=True)
class IfBlock:
    lhs: Expr
    cmp: str
    rhs: Expr
    body: Tuple["Stmt", ...]


@dataclass(frozen=True)
class PrintComp:
    """Final statement: print comp to standard output."""


Stmt = Union[TempDecl, Accumulate, ArrayStore, ForLoop, IfBlock, PrintComp]


@dataclass(frozen=True)
class ProgramAst:
    """A randomly generated kernel program."""

    params: Tuple[Param, ...]
    body: Tuple[Stmt, ...]
    precision: Precision = Precision.FP64
    kernel_name: str = field(default=KERNEL_NAME)

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def params_of(self, kind: ParamKind) -> Tuple[Param, ...]:
        return tuple(p for p in self.params if p.kind is kind)


def iter_statements(body: Tuple[Stmt, ...]) -> Iterator[Stmt]:
    """Depth-first walk over statements, nested bodies included."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, (ForLoop, IfBlock)):
            yield from iter_statements(stmt.body)


def statement_expressions(stmt: Stmt) -> Tuple[Expr, ...]:
    if isinstance(stmt, TempDecl):
        return (stmt.init,)
    if isinstance(stmt, (Accumulate, ArrayStore)):
        return (stmt.rhs,)
    if isinstance(stmt, IfBlock):
        return (stmt.lhs, stmt.rhs)
    return ()


def iter_expressions(expr: Expr) -> Iterator[Expr]:
    """Pre-order walk over an expression tree."""
    yield expr
    if isinstance(expr, BinOp):
        yield from iter_expressions(expr.lhs)
        yield from iter_expressions(expr.rhs)
    elif isinstance(expr, Paren):
        yield from iter_expressions(expr.inner)
    elif isinstance(expr, MathCall):
        for arg in expr.args:
            yield from iter_expressions(arg)


def iter_program_expressions(ast: ProgramAst) -> Iterator[Expr]:
    for stmt in iter_statements(ast.body):
        for expr in statement_expressions(stmt):
            yield from iter_expressions(expr)


# Canonical JSON form

_NODE_TYPES = {
    cls.__name__: cls
    for cls in (
        Literal, VarRef, ArrayRef, BinOp, Paren, MathCall, CompRef,
        TempDecl, Accumulate, ArrayStore, ForLoop, IfBlock, PrintComp, Param,
    )
}


def _node_to_dict(node: Any) -> Any:
    if isinstance(node, tuple):
        return [_node_to_dict(item) for item in node]
    if isinstance(node, Enum):
        return node.value
    if type(node).__name__ in _NODE_TYPES:
        data: Dict[str, Any] = {"node": type(node).__name__}
        for f in fields(node):
            data[f.name] = _node_to_dict(getattr(node, f.name))
        return data
    return node


def _node_from_dict(data: Any) -> Any:
    if isinstance(data, list):
        return tuple(_node_from_dict(item) for item in data)
    if not isinstance(data, dict):
        return data
    cls = _NODE_TYPES[data["node"]]
    kwargs = {k: _node_from_dict(v) for k, v in data.items() if k != "node"}
    if cls is Literal:
        kwargs["precision"] = Precision(kwargs.get("precision", Precision.FP64.value))
    if cls is Param:
        kwargs["kind"] = ParamKind(kwargs["kind"])
    return cls(**kwargs)


def ast_to_dict(ast: ProgramAst) -> Dict[str, Any]:
    """Canonical, JSON-ready form of a program."""
    return {
        "kernel_name": ast.kernel_name,
        "precision": ast.precision.value,
        "params": _node_to_dict(ast.params),
        "body": _node_to_dict(ast.body),
    }


def ast_from_dict(data: Dict[str, Any]) -> ProgramAst:
    return ProgramAst(
        kernel_name=data.get("kernel_name", KERNEL_NAME),
        precision=Precision(data["precision"]),
        params=_node_from_dict(data["params"]),
        body=_node_from_dict(data["body"]),
    )
