"""
Test configuration and fixtures.
"""
import re
import shutil
from typing import List

import pytest

from fpdiff.core.entities.execution import InputVector
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import (
    Accumulate,
    ArrayRef,
    ArrayStore,
    BinOp,
    CompRef,
    ForLoop,
    IfBlock,
    Literal,
    MathCall,
    Param,
    ParamKind,
    Paren,
    PrintComp,
    ProgramAst,
    TempDecl,
    VarRef,
)
from fpdiff.core.services.input_generator import input_vector_from_strings
from fpdiff.core.services.oracle import NumpyMathBackend
from fpdiff.schemas.compiler import CompilerSpec

HOST_CC = next((cc for cc in ("cc", "gcc", "clang") if shutil.which(cc)), None)

requires_host_cc = pytest.mark.skipif(HOST_CC is None, reason="no host C compiler on PATH")

_LITERAL = re.compile(r"^([+-])(\d\.\d{4})E([+-]?\d+)$")


def lit(text: str, precision: Precision = Precision.FP64) -> Literal:
    """Literal from its source spelling, e.g. "+1.3305E12"."""
    sign, mantissa, exponent = _LITERAL.match(text).groups()
    return Literal(sign, mantissa, int(exponent), precision)


def v(name: str) -> VarRef:
    return VarRef(name)


def fp_params(*names: str) -> List[Param]:
    return [Param(name, ParamKind.FP_SCALAR) for name in names]


def inputs_for(ast: ProgramAst, text: str, test_id: str = "fixture") -> InputVector:
    return input_vector_from_strings(ast, test_id, text.split())


def scalar_program(*body, num_fp: int = 2, precision: Precision = Precision.FP64) -> ProgramAst:
    """comp, var_1 (int) and var_2.. scalars around the given statements."""
    params = [Param("comp", ParamKind.COMP_ACCUMULATOR), Param("var_1", ParamKind.INT_SCALAR)]
    params += fp_params(*(f"var_{i}" for i in range(2, 2 + num_fp)))
    return ProgramAst(tuple(params), tuple(body) + (PrintComp(),), precision)


@pytest.fixture
def guarded_program() -> ProgramAst:
    """FP64 kernel with an equality guard, a temp, cos, sqrt and a loop."""
    params = [Param("comp", ParamKind.COMP_ACCUMULATOR), Param("var_1", ParamKind.INT_SCALAR)]
    params += fp_params(*(f"var_{i}" for i in range(2, 9)))
    body = (
        IfBlock(
            CompRef(),
            "==",
            BinOp("+", lit("-1.3857E-36"), v("var_2")),
            (
                TempDecl("tmp_1", BinOp("/", lit("+1.3305E12"), v("var_3"))),
                Accumulate("+=", BinOp("*", lit("-1.7744E-2"), v("tmp_1"))),
                Accumulate(
                    "+=",
                    MathCall(
                        "cos",
                        (
                            BinOp(
                                "-",
                                v("var_4"),
                                BinOp("*", lit("+1.4014E2"), Paren(BinOp("+", v("var_5"), BinOp("*", v("var_6"), v("var_7"))))),
                            ),
                        ),
                    ),
                ),
                ForLoop(
                    "var_1",
                    "i",
                    (Accumulate("-=", MathCall("sqrt", (BinOp("+", v("var_8"), lit("-1.7976E3")),))),),
                ),
            ),
        ),
        PrintComp(),
    )
    return ProgramAst(tuple(params), body)


@pytest.fixture
def fmod_array_program() -> ProgramAst:
    """FP64 kernel with an array parameter, array stores and fmod."""
    params = [Param("comp", ParamKind.COMP_ACCUMULATOR), Param("var_1", ParamKind.INT_SCALAR)]
    params += fp_params("var_2", "var_3", "var_4")
    params.append(Param("var_5", ParamKind.FP_ARRAY))
    params += fp_params(*(f"var_{i}" for i in range(6, 11)))
    store = BinOp(
        "-",
        BinOp("/", lit("-0.0000E0"), lit("-1.5942E305")),
        MathCall(
            "fmod",
            (
                Paren(BinOp("+", lit("+1.7085E-315"), v("var_6"))),
                BinOp(
                    "/",
                    lit("-1.9289E305"),
                    Paren(
                        BinOp(
                            "+",
                            BinOp("+", BinOp("-", lit("-1.2924E-311"), lit("+0.0000E0")), v("var_7")),
                            lit("+1.3278E-316"),
                        )
                    ),
                ),
            ),
        ),
    )
    accumulate = BinOp(
        "-",
        ArrayRef("var_5", "i"),
        MathCall(
            "fmod",
            (
                Paren(
                    BinOp(
                        "*",
                        lit("-1.7538E305"),
                        Paren(BinOp("/", v("var_8"), Paren(BinOp("-", BinOp("/", lit("+0.0000E0"), v("var_9")), lit("+1.3065E-306"))))),
                    )
                ),
                lit("+1.5793E-307"),
            ),
        ),
    )
    body = (
        IfBlock(
            CompRef(),
            ">=",
            Paren(BinOp("*", v("var_2"), Paren(BinOp("+", v("var_3"), v("var_4"))))),
            (
                ForLoop(
                    "var_1",
                    "i",
                    (
                        ArrayStore("var_5", "i", store),
                        Accumulate("+=", accumulate),
                        Accumulate("+=", BinOp("+", lit("+1.8753E-306"), v("var_10"))),
                    ),
                ),
            ),
        ),
        PrintComp(),
    )
    return ProgramAst(tuple(params), body)


@pytest.fixture
def ceil_program() -> ProgramAst:
    """comp += tmp_1 / ceil(+1.5955E-125) with comp as the only parameter."""
    body = (
        TempDecl("tmp_1", lit("+1.1147E-307")),
        Accumulate("+=", BinOp("/", v("tmp_1"), MathCall("ceil", (lit("+1.5955E-125"),)))),
        PrintComp(),
    )
    return ProgramAst((Param("comp", ParamKind.COMP_ACCUMULATOR),), body)


@pytest.fixture
def overflow_program() -> ProgramAst:
    """Kernel whose comp reaches -inf before a guard that adds +inf."""
    params = [Param("comp", ParamKind.COMP_ACCUMULATOR), Param("var_1", ParamKind.INT_SCALAR)]
    params += fp_params(*(f"var_{i}" for i in range(2, 9)))
    tmp = Paren(
        BinOp(
            "-",
            lit("-1.8007E-323"),
            MathCall(
                "cosh",
                (
                    BinOp(
                        "+",
                        BinOp("/", v("var_2"), lit("-1.7569E192")),
                        Paren(BinOp("+", BinOp("/", lit("-1.9894E-307"), lit("+1.7323E-313")), v("var_3"))),
                    ),
                ),
            ),
        )
    )
    guard = Paren(
        BinOp(
            "-",
            lit("-1.4205E305"),
            Paren(BinOp("*", lit("-1.4055E-312"), Paren(BinOp("+", v("var_6"), BinOp("/", lit("-1.7892E214"), v("var_7")))))),
        )
    )
    body = (
        TempDecl("tmp_1", tmp),
        Accumulate("+=", BinOp("+", v("tmp_1"), MathCall("fabs", (BinOp("-", lit("+1.5726E-307"), v("var_4")),)))),
        ForLoop("var_1", "i", (Accumulate("+=", Paren(BinOp("/", lit("+1.9903E306"), v("var_5")))),)),
        IfBlock(CompRef(), ">=", guard, (Accumulate("+=", BinOp("*", lit("+1.3803E305"), v("var_8"))),)),
        PrintComp(),
    )
    return ProgramAst(tuple(params), body)


@pytest.fixture
def numpy_math():
    return NumpyMathBackend()


@pytest.fixture
def host_cc_spec() -> CompilerSpec:
    if HOST_CC is None:
        pytest.skip("no host C compiler on PATH")
    return CompilerSpec(id=HOST_CC, command=HOST_CC, extensions=[".c"], link_args=["-lm"])


@pytest.fixture
def work_dir(tmp_path):
    path = tmp_path / "work"
    path.mkdir()
    return path
