"""
Well-formedness checks for kernel programs, independent of the generator.
"""
import re
from typing import List, Optional, Sequence

from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import (
    ACCUMULATE_OPS,
    BINARY_OPS,
    COMPARATORS,
    KERNEL_NAME,
    MATH_FUNCTIONS,
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
    math_arity,
)
from fpdiff.schemas.generation import GenConfig

_MANTISSA = re.compile(r"^\d\.\d{4}$")


class _Checker:
    def __init__(self, ast: ProgramAst, config: Optional[GenConfig]):
        self.ast = ast
        self.config = config
        self.errors: List[str] = []
        self.temps_seen: set = set()
        self.max_depth = 0

    def fail(self, message: str) -> None:
        self.errors.append(message)

    def run(self) -> List[str]:
        ast = self.ast
        if ast.kernel_name != KERNEL_NAME:
            self.fail(f"kernel is named {ast.kernel_name!r}")
        if not ast.params or ast.params[0].kind is not ParamKind.COMP_ACCUMULATOR:
            self.fail("first parameter is not the comp accumulator")
        if sum(p.kind is ParamKind.COMP_ACCUMULATOR for p in ast.params) != 1:
            self.fail("exactly one comp accumulator expected")
        names = [p.name for p in ast.params]
        if len(set(names)) != len(names):
            self.fail("duplicate parameter names")

        if not ast.body or not isinstance(ast.body[-1], PrintComp):
            self.fail("body does not end with printing comp")
        self.block(ast.body, visible=[], induction=[], depth=0, top=True)

        if self.config is not None and self.max_depth > self.config.max_loop_nesting:
            self.fail(f"loop depth {self.max_depth} exceeds {self.config.max_loop_nesting}")
        return self.errors

    def block(self, body: Sequence[Stmt], visible: List[str], induction: List[str], depth: int, top: bool = False) -> None:
        visible = list(visible)
        for position, stmt in enumerate(body):
            if isinstance(stmt, PrintComp):
                if not (top and position == len(body) - 1):
                    self.fail("comp printed before the end of the kernel")
            elif isinstance(stmt, TempDecl):
                self.expr(stmt.init, visible, induction)
                if stmt.name in self.temps_seen or self.ast.param(stmt.name) is not None:
                    self.fail(f"temp {stmt.name} declared twice")
                self.temps_seen.add(stmt.name)
                visible.append(stmt.name)
            elif isinstance(stmt, Accumulate):
                if stmt.op not in ACCUMULATE_OPS:
                    self.fail(f"bad accumulate operator {stmt.op}")
                self.expr(stmt.rhs, visible, induction)
            elif isinstance(stmt, ArrayStore):
                self.array_access(stmt.array_name, stmt.index_var, induction)
                self.expr(stmt.rhs, visible, induction)
            elif isinstance(stmt, ForLoop):
                bound = self.ast.param(stmt.bound_param)
                if bound is None or bound.kind is not ParamKind.INT_SCALAR:
                    self.fail(f"loop bound {stmt.bound_param} is not an int parameter")
                if stmt.induction_var in induction:
                    self.fail(f"induction variable {stmt.induction_var} shadows an enclosing loop")
                self.max_depth = max(self.max_depth, depth + 1)
                if not stmt.body:
                    self.fail("empty loop body")
                self.block(stmt.body, visible, induction + [stmt.induction_var], depth + 1)
            elif isinstance(stmt, IfBlock):
                if stmt.cmp not in COMPARATORS:
                    self.fail(f"bad comparator {stmt.cmp}")
                if not isinstance(stmt.lhs, CompRef):
                    self.fail("if-guard does not compare comp")
                self.expr(stmt.lhs, visible, induction)
                self.expr(stmt.rhs, visible, induction)
                self.block(stmt.body, visible, induction, depth)
            else:
                self.fail(f"unknown statement {type(stmt).__name__}")

    def array_access(self, array: str, index_var: str, induction: List[str]) -> None:
        param = self.ast.param(array)
        if param is None or param.kind is not ParamKind.FP_ARRAY:
            self.fail(f"{array} is not an array parameter")
        if index_var not in induction:
            self.fail(f"index {index_var} is not an enclosing induction variable")

    def expr(self, expr: Expr, visible: List[str], induction: List[str]) -> None:
        precision = self.ast.precision
        if isinstance(expr, Literal):
            if expr.sign not in ("+", "-") or not _MANTISSA.match(expr.mantissa):
                self.fail(f"malformed literal {expr!r}")
            if expr.precision is not precision:
                self.fail(f"literal {expr.render()} has the wrong precision")
        elif isinstance(expr, VarRef):
            param = self.ast.param(expr.name)
            known = (
                (param is not None and param.kind in (ParamKind.FP_SCALAR, ParamKind.INT_SCALAR))
                or expr.name in visible
                or expr.name in induction
            )
            if not known:
                self.fail(f"unbound variable {expr.name}")
        elif isinstance(expr, ArrayRef):
            self.array_access(expr.array_name, expr.index_var, induction)
        elif isinstance(expr, BinOp):
            if expr.op not in BINARY_OPS:
                self.fail(f"bad binary operator {expr.op}")
            self.expr(expr.lhs, visible, induction)
            self.expr(expr.rhs, visible, induction)
        elif isinstance(expr, Paren):
            self.expr(expr.inner, visible, induction)
        elif isinstance(expr, MathCall):
            base = base_function_name(expr.fn_name)
            suffixed = expr.fn_name != base
            if base not in MATH_FUNCTIONS:
                self.fail(f"unknown math function {expr.fn_name}")
            elif suffixed != (precision is Precision.FP32):
                self.fail(f"math function {expr.fn_name} does not match {precision.value}")
            elif math_arity(base) != len(expr.args):
                self.fail(f"{expr.fn_name} called with {len(expr.args)} arguments")
            for arg in expr.args:
                self.expr(arg, visible, induction)
        elif not isinstance(expr, CompRef):
            self.fail(f"unknown expression {type(expr).__name__}")


def validate_ast(ast: ProgramAst, config: Optional[GenConfig] = None) -> List[str]:
    """Return every invariant violation found; an empty list means well-formed."""
    return _Checker(ast, config).run()


def loop_depth(ast: ProgramAst) -> int:
    def depth(body: Sequence[Stmt]) -> int:
        best = 0
        for stmt in body:
            if isinstance(stmt, ForLoop):
                best = max(best, 1 + depth(stmt.body))
            elif isinstance(stmt, IfBlock):
                best = max(best, depth(stmt.body))
        return best

    return depth(ast.body)
