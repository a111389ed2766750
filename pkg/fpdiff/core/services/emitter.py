"""
Source emission in CUDA, HIP and portable C, and CUDA -> HIP conversion.
"""
import re
import subprocess
import tempfile
from collections import Counter
from pathlib import Path
from typing import List, Optional, Union

import structlog

from fpdiff.core.entities.execution import Dialect, SourceBundle
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import (
    COMP,
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
    TempDecl,
    VarRef,
)
from fpdiff.core.services.program_generator import ast_signature
from fpdiff.exceptions import DialectError, ToolchainError, UnsupportedConstructError

logger = structlog.get_logger()

DEFAULT_ARRAY_LENGTH = 10
INDENT = "  "

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _resolve_dialect(dialect: Union[Dialect, str]) -> Dialect:
    try:
        return Dialect(dialect)
    except ValueError:
        raise DialectError(dialect) from None


# Kernel text (identical in every dialect)

def render_expr(expr: Expr) -> str:
    """C text of an expression; parentheses are added where the tree needs them."""
    if isinstance(expr, Literal):
        return expr.render()
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, ArrayRef):
        return f"{expr.array_name}[{expr.index_var}]"
    if isinstance(expr, CompRef):
        return COMP
    if isinstance(expr, Paren):
        return f"({render_expr(expr.inner)})"
    if isinstance(expr, MathCall):
        return f"{expr.fn_name}({', '.join(render_expr(a) for a in expr.args)})"
    if isinstance(expr, BinOp):
        lhs = render_expr(expr.lhs)
        rhs = render_expr(expr.rhs)
        # C binary operators are left-associative.
        if isinstance(expr.lhs, BinOp) and _PRECEDENCE[expr.lhs.op] < _PRECEDENCE[expr.op]:
            lhs = f"({lhs})"
        if isinstance(expr.rhs, BinOp) and _PRECEDENCE[expr.rhs.op] <= _PRECEDENCE[expr.op]:
            rhs = f"({rhs})"
        return f"{lhs} {expr.op} {rhs}"
    raise TypeError(f"Unknown expression node {type(expr).__name__}")


def _print_statement(decimal_echo: bool) -> str:
    if decimal_echo:
        return f'printf("%a %.17g\\n", {COMP}, {COMP});'
    return f'printf("%a\\n", {COMP});'


def _render_block(body, precision: Precision, depth: int, decimal_echo: bool) -> List[str]:
    pad = INDENT * depth
    lines: List[str] = []
    for stmt in body:
        if isinstance(stmt, TempDecl):
            lines.append(f"{pad}{precision.c_type} {stmt.name} = {render_expr(stmt.init)};")
        elif isinstance(stmt, Accumulate):
            lines.append(f"{pad}{COMP} {stmt.op} {render_expr(stmt.rhs)};")
        elif isinstance(stmt, ArrayStore):
            lines.append(f"{pad}{stmt.array_name}[{stmt.index_var}] = {render_expr(stmt.rhs)};")
        elif isinstance(stmt, ForLoop):
            v = stmt.induction_var
            lines.append(f"{pad}for (int {v} = 0; {v} < {stmt.bound_param}; ++{v}) {{")
            lines.extend(_render_block(stmt.body, precision, depth + 1, decimal_echo))
            lines.append(f"{pad}}}")
        elif isinstance(stmt, IfBlock):
            lines.append(f"{pad}if ({render_expr(stmt.lhs)} {stmt.cmp} {render_expr(stmt.rhs)}) {{")
            lines.extend(_render_block(stmt.body, precision, depth + 1, decimal_echo))
            lines.append(f"{pad}}}")
        elif isinstance(stmt, PrintComp):
            lines.append(f"{pad}{_print_statement(decimal_echo)}")
        else:
            raise TypeError(f"Unknown statement node {type(stmt).__name__}")
    return lines


def _param_decl(ast: ProgramAst, kind: ParamKind, name: str) -> str:
    if kind is ParamKind.INT_SCALAR:
        return f"int {name}"
    if kind is ParamKind.FP_ARRAY:
        return f"{ast.precision.c_type}* {name}"
    return f"{ast.precision.c_type} {name}"


def render_kernel(ast: ProgramAst, decimal_echo: bool = False) -> List[str]:
    params = ", ".join(_param_decl(ast, p.kind, p.name) for p in ast.params)
    lines = [f"void {ast.kernel_name}({params}) {{"]
    lines.extend(_render_block(ast.body, ast.precision, 1, decimal_echo))
    lines.append("}")
    return lines


# Dialect surfaces

class _Surface:
    """The parts of a translation unit that differ between dialects."""

    headers: List[str] = ["#include <stdio.h>", "#include <stdlib.h>", "#include <math.h>"]
    kernel_qualifier: Optional[str] = None

    def allocate(self, ctype: str, length: int) -> List[str]:
        return [f"{ctype}* ret = ({ctype}*) malloc({length} * sizeof({ctype}));"]

    def launch(self, kernel: str, args: str) -> str:
        return f"{kernel}({args});"

    def synchronize(self) -> List[str]:
        return []

    def free(self, name: str) -> str:
        return f"free({name});"


class _CudaSurface(_Surface):
    headers = _Surface.headers + ["#include <cuda_runtime.h>"]
    kernel_qualifier = "__global__"

    def allocate(self, ctype: str, length: int) -> List[str]:
        return [
            f"{ctype}* ret = NULL;",
            f"cudaMallocManaged((void**)&ret, {length} * sizeof({ctype}));",
        ]

    def launch(self, kernel: str, args: str) -> str:
        return f"{kernel}<<<1, 1>>>({args});"

    def synchronize(self) -> List[str]:
        return ["cudaDeviceSynchronize();"]

    def free(self, name: str) -> str:
        return f"cudaFree({name});"


class _HipSurface(_Surface):
    headers = _Surface.headers + ["#include <hip/hip_runtime.h>"]
    kernel_qualifier = "__global__"

    def allocate(self, ctype: str, length: int) -> List[str]:
        return [
            f"{ctype}* ret = NULL;",
            f"hipMallocManaged((void**)&ret, {length} * sizeof({ctype}));",
        ]

    def launch(self, kernel: str, args: str) -> str:
        return f"hipLaunchKernelGGL({kernel}, dim3(1), dim3(1), 0, 0, {args});"

    def synchronize(self) -> List[str]:
        return ["hipDeviceSynchronize();"]

    def free(self, name: str) -> str:
        return f"hipFree({name});"


_SURFACES = {
    Dialect.CUDA: _CudaSurface(),
    Dialect.HIP: _HipSurface(),
    Dialect.PORTABLE_C: _Surface(),
}


def _render_main(ast: ProgramAst, surface: _Surface) -> List[str]:
    ctype = ast.precision.c_type
    parse = "strtod" if ast.precision is Precision.FP64 else "strtof"
    expected = len(ast.params) + 1
    lines = [
        "int main(int argc, char** argv) {",
        f"{INDENT}if (argc != {expected}) {{",
        f'{INDENT * 2}fprintf(stderr, "expected {expected - 1} arguments\\n");',
        f"{INDENT * 2}return 1;",
        f"{INDENT}}}",
    ]
    for position, param in enumerate(ast.params, start=1):
        if param.kind is ParamKind.INT_SCALAR:
            lines.append(f"{INDENT}int {param.name} = atoi(argv[{position}]);")
        elif param.kind is ParamKind.FP_ARRAY:
            lines.append(f"{INDENT}{ctype}* {param.name} = init_array({parse}(argv[{position}], NULL));")
        else:
            lines.append(f"{INDENT}{ctype} {param.name} = {parse}(argv[{position}], NULL);")
    args = ", ".join(p.name for p in ast.params)
    lines.append(f"{INDENT}{surface.launch(ast.kernel_name, args)}")
    lines.extend(f"{INDENT}{line}" for line in surface.synchronize())
    for param in ast.params_of(ParamKind.FP_ARRAY):
        lines.append(f"{INDENT}{surface.free(param.name)}")
    lines.append(f"{INDENT}return 0;")
    lines.append("}")
    return lines


def _render_array_init(ast: ProgramAst, surface: _Surface, array_length: int) -> List[str]:
    ctype = ast.precision.c_type
    lines = [f"{ctype}* init_array({ctype} v) {{"]
    lines.extend(f"{INDENT}{line}" for line in surface.allocate(ctype, array_length))
    lines.append(f"{INDENT}for (int i = 0; i < {array_length}; ++i) {{")
    lines.append(f"{INDENT * 2}ret[i] = v;")
    lines.append(f"{INDENT}}}")
    lines.append(f"{INDENT}return ret;")
    lines.append("}")
    return lines


def emit_source(
    ast: ProgramAst,
    dialect: Union[Dialect, str],
    test_id: str = "",
    array_length: int = DEFAULT_ARRAY_LENGTH,
    decimal_echo: bool = False,
) -> SourceBundle:
    """Render a program and its harness main() in one dialect."""
    dialect = _resolve_dialect(dialect)
    surface = _SURFACES[dialect]

    lines = list(surface.headers)
    lines.append("")
    if surface.kernel_qualifier:
        lines.append(surface.kernel_qualifier)
    lines.extend(render_kernel(ast, decimal_echo))
    lines.append("")
    if ast.params_of(ParamKind.FP_ARRAY):
        lines.extend(_render_array_init(ast, surface, array_length))
        lines.append("")
    lines.extend(_render_main(ast, surface))

    if not test_id:
        test_id = ast_signature(ast)
    return SourceBundle(
        test_id=test_id,
        dialect=dialect,
        source_text="\n".join(lines) + "\n",
        precision=ast.precision,
    )


# CUDA -> HIP

_HEADER_RENAMES = {
    "cuda_runtime.h": "hip/hip_runtime.h",
    "cuda_runtime_api.h": "hip/hip_runtime_api.h",
    "cuda.h": "hip/hip_runtime.h",
}

_API_RENAMES = {
    "cudaMallocManaged": "hipMallocManaged",
    "cudaMalloc": "hipMalloc",
    "cudaFree": "hipFree",
    "cudaMemcpy": "hipMemcpy",
    "cudaMemcpyHostToDevice": "hipMemcpyHostToDevice",
    "cudaMemcpyDeviceToHost": "hipMemcpyDeviceToHost",
    "cudaMemset": "hipMemset",
    "cudaDeviceSynchronize": "hipDeviceSynchronize",
    "cudaGetLastError": "hipGetLastError",
    "cudaGetErrorString": "hipGetErrorString",
    "cudaError_t": "hipError_t",
    "cudaSuccess": "hipSuccess",
}

_INCLUDE = re.compile(r'#include\s*([<"])([^>"]+)[>"]')
_LAUNCH = re.compile(r"\b([A-Za-z_]\w*)\s*<<<(.*?)>>>\s*\((\s*\))?", re.S)
_CUDA_IDENTIFIER = re.compile(r"\bcuda\w*")
_UNSUPPORTED = re.compile(
    r"\b(threadIdx|blockIdx|blockDim|gridDim|__shared__|__constant__|__syncthreads|cooperative_groups)\b"
)


def _rewrite_include(match: re.Match) -> str:
    header = match.group(2)
    if header in _HEADER_RENAMES:
        return f"#include <{_HEADER_RENAMES[header]}>"
    if header.startswith(("cu", "cuda")) and header.endswith(".h"):
        raise UnsupportedConstructError(f"#include <{header}>")
    return match.group(0)


def _rewrite_launch(match: re.Match) -> str:
    kernel, config, no_args = match.group(1), match.group(2), match.group(3)
    parts = [p.strip() for p in config.split(",")]
    if not 2 <= len(parts) <= 4 or not all(parts):
        raise UnsupportedConstructError(f"launch configuration <<<{config}>>>")
    grid, block = parts[0], parts[1]
    shared = parts[2] if len(parts) > 2 else "0"
    stream = parts[3] if len(parts) > 3 else "0"
    head = f"hipLaunchKernelGGL({kernel}, dim3({grid}), dim3({block}), {shared}, {stream}"
    return f"{head})" if no_args else f"{head}, "


def _rewrite_identifier(match: re.Match) -> str:
    name = match.group(0)
    if name not in _API_RENAMES:
        raise UnsupportedConstructError(name)
    return _API_RENAMES[name]


def hipify_lite(cuda_source: str, tool_path: Optional[str] = None) -> str:
    """Translate generated CUDA source to HIP.

    With ``tool_path`` set, an external hipify tool is run instead and its
    output is returned verbatim.
    """
    if tool_path:
        return _run_external_hipify(cuda_source, tool_path)

    unsupported = _UNSUPPORTED.search(cuda_source)
    if unsupported:
        raise UnsupportedConstructError(unsupported.group(1))
    text = _INCLUDE.sub(_rewrite_include, cuda_source)
    text = _LAUNCH.sub(_rewrite_launch, text)
    return _CUDA_IDENTIFIER.sub(_rewrite_identifier, text)


def _run_external_hipify(cuda_source: str, tool_path: str) -> str:
    with tempfile.TemporaryDirectory(prefix="fpdiff-hipify-") as tmp:
        source = Path(tmp) / "input.cu"
        source.write_text(cuda_source, encoding="utf-8")
        try:
            result = subprocess.run(
                [tool_path, str(source)], capture_output=True, text=True, check=False
            )
        except OSError as e:
            raise ToolchainError(f"Cannot run hipify tool {tool_path}: {e}") from e
    if result.returncode != 0:
        logger.error("External hipify failed", tool=tool_path, stderr=result.stderr[-2000:])
        raise ToolchainError(f"hipify tool {tool_path} exited with status {result.returncode}")
    return result.stdout


# Token views used for dialect parity checks

_TOKEN = re.compile(r"[A-Za-z_]\w*|\d[\w.]*(?:[eEpP][+-]?\d+)?F?|<<<|>>>|[+\-*/=<>!]=|\+\+|\S")
_ARITHMETIC_TOKEN = re.compile(
    r"[+-]\d\.\d{4}E-?\d+F?"
    r"|\b(?:" + "|".join(MATH_FUNCTIONS) + r")f?(?=\()"
    r"|\+=|-=|\*=|==|>=|<=|[+\-*/<>]"
)


def source_tokens(text: str) -> List[str]:
    """Whitespace-insensitive token list of C-like text."""
    return _TOKEN.findall(text)


def kernel_body(source_text: str, kernel_name: str = "compute") -> str:
    start = source_text.index(f"void {kernel_name}(")
    open_brace = source_text.index("{", start)
    depth = 0
    for position in range(open_brace, len(source_text)):
        char = source_text[position]
        if char == "{":
            depth += 1
        elif char == "}":
            depth -= 1
            if depth == 0:
                return source_text[open_brace + 1:position]
    raise ValueError("unbalanced kernel body")


def arithmetic_tokens(source_text: str) -> Counter:
    """Multiset of literals, operators and math functions (f-suffix removed) in the kernel."""
    counts: Counter = Counter()
    for token in _ARITHMETIC_TOKEN.findall(kernel_body(source_text)):
        if token[0].isalpha() and token not in MATH_FUNCTIONS:
            token = token[:-1]
        counts[token] += 1
    return counts
