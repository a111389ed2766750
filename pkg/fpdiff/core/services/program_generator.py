"""
Seeded random generation of kernel programs.
"""
import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import structlog

from fpdiff.core.entities.program import (
    ACCUMULATE_OPS,
    BINARY_OPS,
    COMP,
    COMPARATORS,
    ONE_ARG_FUNCTIONS,
    TWO_ARG_FUNCTIONS,
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
    Param,
    ParamKind,
    Paren,
    PrintComp,
    ProgramAst,
    Stmt,
    TempDecl,
    VarRef,
    ast_to_dict,
)
from fpdiff.schemas.generation import GenConfig

logger = structlog.get_logger()

INDUCTION_NAMES = ("i", "j", "k", "l", "m", "n", "p", "q")

# Nonzero literal and input mantissas always lead with 1.
LEADING_DIGIT = "1"
ZERO_MANTISSA = "0.0000"

_LEAF_PROBABILITY = 0.35
_COMP_LEAF_WEIGHT = 0.1
_MAX_LITERAL_ATTEMPTS = 64


def induction_name(depth: int) -> str:
    if depth < len(INDUCTION_NAMES):
        return INDUCTION_NAMES[depth]
    return f"i{depth}"


@dataclass
class _Scope:
    """Names visible at a point of the program being generated."""

    temps: List[str] = field(default_factory=list)
    induction_vars: List[str] = field(default_factory=list)
    in_if: bool = False

    def child(self, induction_var: Optional[str] = None, in_if: bool = False) -> "_Scope":
        return _Scope(
            temps=list(self.temps),
            induction_vars=self.induction_vars + ([induction_var] if induction_var else []),
            in_if=self.in_if or in_if,
        )


def sample_literal(config: GenConfig, rng: random.Random) -> Literal:
    """Draw a literal.

    A signed zero comes up with ``zero_literal_probability``; other literals are
    finite and nonzero with a log-uniform magnitude.
    """
    if config.zero_literal_probability > 0 and rng.random() < config.zero_literal_probability:
        return Literal(sign=rng.choice("+-"), mantissa=ZERO_MANTISSA, exponent=0, precision=config.precision)
    lo, hi = config.exponent_range
    exponent = rng.randint(lo, hi)
    sign = rng.choice("+-")
    literal = None
    for _ in range(_MAX_LITERAL_ATTEMPTS):
        mantissa = f"{LEADING_DIGIT}.{rng.randrange(10_000):04d}"
        literal = Literal(sign=sign, mantissa=mantissa, exponent=exponent, precision=config.precision)
        value = literal.value
        if value != 0.0 and abs(value) <= config.precision.largest_finite:
            return literal
    # 1.0000 is representable at every exponent inside the precision's span.
    return Literal(sign=sign, mantissa="1.0000", exponent=exponent, precision=config.precision)


class ProgramGenerator:
    """Generates one program from a configuration; one instance per program."""

    def __init__(self, config: GenConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self._temp_count = 0
        self._params: Tuple[Param, ...] = ()

    def generate(self) -> ProgramAst:
        self._params = self._make_params()
        if self.config.max_stmts_per_block > 0:
            body = self._block(_Scope(), depth=0)
        else:
            body = []
        body.append(PrintComp())
        return ProgramAst(params=self._params, body=tuple(body), precision=self.config.precision)

    def _make_params(self) -> Tuple[Param, ...]:
        params = [Param(COMP, ParamKind.COMP_ACCUMULATOR)]
        index = 1
        for _ in range(self.config.num_int_params):
            params.append(Param(f"var_{index}", ParamKind.INT_SCALAR))
            index += 1
        for _ in range(self.config.num_fp_params):
            is_array = self.rng.random() < self.config.array_probability
            params.append(Param(f"var_{index}", ParamKind.FP_ARRAY if is_array else ParamKind.FP_SCALAR))
            index += 1
        return tuple(params)

    def _of_kind(self, kind: ParamKind) -> List[str]:
        return [p.name for p in self._params if p.kind is kind]

    # Statements

    def _block(self, scope: _Scope, depth: int) -> List[Stmt]:
        count = self.rng.randint(1, self.config.max_stmts_per_block)
        return [self._statement(scope, depth) for _ in range(count)]

    def _statement(self, scope: _Scope, depth: int) -> Stmt:
        weights = self.config.statement_weights
        arrays = self._of_kind(ParamKind.FP_ARRAY)
        candidates = [("temp", weights["temp"]), ("accumulate", weights["accumulate"])]
        if scope.induction_vars and arrays:
            candidates.append(("array_store", weights["array_store"]))
        if depth < self.config.max_loop_nesting:
            candidates.append(("loop", weights["loop"]))
        if not scope.in_if or self.config.allow_nested_ifs:
            candidates.append(("if", weights["if"]))
        candidates = [(kind, w) for kind, w in candidates if w > 0]
        if not candidates:
            kind = "accumulate"
        else:
            kind = self.rng.choices([k for k, _ in candidates], weights=[w for _, w in candidates])[0]

        if kind == "temp":
            init = self._expr(scope, self.config.max_expr_nodes)
            self._temp_count += 1
            name = f"tmp_{self._temp_count}"
            scope.temps.append(name)
            return TempDecl(name=name, init=init)
        if kind == "array_store":
            return ArrayStore(
                array_name=self.rng.choice(arrays),
                index_var=self.rng.choice(scope.induction_vars),
                rhs=self._expr(scope, self.config.max_expr_nodes),
            )
        if kind == "loop":
            var = induction_name(depth)
            bound = self.rng.choice(self._of_kind(ParamKind.INT_SCALAR))
            body = self._block(scope.child(induction_var=var), depth + 1)
            return ForLoop(bound_param=bound, induction_var=var, body=tuple(body))
        if kind == "if":
            cmp = self.rng.choice(COMPARATORS)
            rhs = self._expr(scope, self.config.max_expr_nodes)
            body = self._block(scope.child(in_if=True), depth)
            return IfBlock(lhs=CompRef(), cmp=cmp, rhs=rhs, body=tuple(body))

        ops = ACCUMULATE_OPS if self.config.allow_multiply_accumulate else ACCUMULATE_OPS[:2]
        return Accumulate(op=self.rng.choice(ops), rhs=self._expr(scope, self.config.max_expr_nodes))

    # Expressions

    def _expr(self, scope: _Scope, budget: int) -> Expr:
        """Random expression with at most ``budget`` nodes."""
        if budget <= 1 or self.rng.random() < _LEAF_PROBABILITY:
            return self._leaf(scope)

        functions = self.config.math_fn_set
        one_arg = [f for f in functions if f in ONE_ARG_FUNCTIONS]
        two_arg = [f for f in functions if f in TWO_ARG_FUNCTIONS] if budget >= 3 else []
        if (one_arg or two_arg) and self.rng.random() < self.config.math_probability:
            name = self.rng.choice(one_arg + two_arg)
            fn_name = name + self.config.precision.math_suffix
            if name in TWO_ARG_FUNCTIONS:
                lhs, rhs = self._split(scope, budget - 1)
                return MathCall(fn_name=fn_name, args=(lhs, rhs))
            return MathCall(fn_name=fn_name, args=(self._expr(scope, budget - 1),))

        if budget < 3:
            return self._leaf(scope)
        if budget >= 4 and self.rng.random() < 0.25:
            lhs, rhs = self._split(scope, budget - 2)
            return Paren(BinOp(op=self.rng.choice(BINARY_OPS), lhs=lhs, rhs=rhs))
        lhs, rhs = self._split(scope, budget - 1)
        return BinOp(op=self.rng.choice(BINARY_OPS), lhs=lhs, rhs=rhs)

    def _split(self, scope: _Scope, budget: int) -> Tuple[Expr, Expr]:
        left = self.rng.randint(1, budget - 1)
        return self._expr(scope, left), self._expr(scope, budget - left)

    def _leaf(self, scope: _Scope) -> Expr:
        scalars = self._of_kind(ParamKind.FP_SCALAR) + scope.temps
        array_refs = [
            (array, var)
            for array in self._of_kind(ParamKind.FP_ARRAY)
            for var in scope.induction_vars
        ]
        literal_p = self.config.literal_probability
        choices = [("literal", literal_p), ("comp", _COMP_LEAF_WEIGHT)]
        if scalars:
            choices.append(("var", (1.0 - literal_p) * (0.7 if array_refs else 1.0)))
        if array_refs:
            choices.append(("array", (1.0 - literal_p) * 0.3))
        choices = [(k, w) for k, w in choices if w > 0] or [("literal", 1.0)]
        kind = self.rng.choices([k for k, _ in choices], weights=[w for _, w in choices])[0]

        if kind == "var":
            return VarRef(self.rng.choice(scalars))
        if kind == "array":
            array, var = self.rng.choice(array_refs)
            return ArrayRef(array_name=array, index_var=var)
        if kind == "comp":
            return CompRef()
        return sample_literal(self.config, self.rng)


def generate_program(config: GenConfig) -> ProgramAst:
    """Generate a program; a pure function of the configuration."""
    ast = ProgramGenerator(config).generate()
    logger.debug("Program generated", seed=config.seed, statements=len(ast.body))
    return ast


def derive_program_config(config: GenConfig, index: int, attempt: int = 0) -> GenConfig:
    """Configuration of the ``index``-th program of a campaign.

    A nonzero ``attempt`` gives another program for the same index.
    """
    key = f"{config.seed}:{index}" if attempt == 0 else f"{config.seed}:{index}:{attempt}"
    digest = hashlib.sha256(key.encode("ascii")).digest()
    return config.model_copy(update={"seed": int.from_bytes(digest[:8], "big")})


def ast_signature(ast: ProgramAst) -> str:
    """Stable content hash of a program, used as its test identifier."""
    canonical = json.dumps(ast_to_dict(ast), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
