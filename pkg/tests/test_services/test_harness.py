"""
Tests for compiler matching and the compile/run harness.
"""
import json

import pytest

from fpdiff.config import settings
from fpdiff.core.entities.execution import Dialect, OptLevel, RunStatus, SourceBundle
from fpdiff.core.entities.outcome import OutcomeTag
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import Accumulate, BinOp
from fpdiff.core.services.emitter import emit_source
from fpdiff.core.services.harness import (
    DEFAULT_REGISTRY,
    Harness,
    RunJob,
    build_command,
    load_registry,
    match_compiler,
    matching_compilers,
)
from fpdiff.dependencies import get_harness
from fpdiff.exceptions import ConfigurationError, UnmatchedExtensionError
from fpdiff.schemas.compiler import CompilerSpec
from tests.conftest import inputs_for, scalar_program, v


def _spec(compiler_id: str) -> CompilerSpec:
    return next(spec for spec in DEFAULT_REGISTRY if spec.id == compiler_id)


def _c_bundle(test_id: str, source: str) -> SourceBundle:
    return SourceBundle(test_id=test_id, dialect=Dialect.PORTABLE_C, source_text=source, precision=Precision.FP64)


class TestCompileCommands:
    """Flag construction per compiler and level."""

    def test_hipcc_fast_math(self):
        """Test that hipcc gets its own fast-math define at O3_FM."""
        argv = build_command(_spec("hipcc"), OptLevel.O3_FM, "t.hip", "t.bin")
        assert argv == ["hipcc", "-O3", "-DHIP_FAST_MATH", "t.hip", "-o", "t.bin"]
        assert "-ffast-math" not in argv

    def test_nvcc_fast_math(self):
        """Test that nvcc gets --use_fast_math at O3_FM."""
        argv = build_command(_spec("nvcc"), OptLevel.O3_FM, "t.cu", "t.bin")
        assert "--use_fast_math" in argv and "-O3" in argv

    def test_host_compiler_levels(self):
        """Test host compiler flags at every level."""
        spec = _spec("gcc")
        assert build_command(spec, OptLevel.O0, "t.c", "t") == ["gcc", "-O0", "t.c", "-o", "t", "-lm"]
        assert "-ffast-math" in build_command(spec, OptLevel.O3_FM, "t.c", "t")
        for level in (OptLevel.O0, OptLevel.O1, OptLevel.O2, OptLevel.O3):
            argv = build_command(spec, level, "t.c", "t")
            assert f"-{level.value}" in argv and "-ffast-math" not in argv

    def test_extra_args_precede_flags(self):
        """Test that extra arguments come before level flags and extensions gain a dot."""
        spec = CompilerSpec(id="x", command="cc", extensions=["c"], extra_args=["-std=c99"])
        assert build_command(spec, OptLevel.O2, "a.c", "a")[:3] == ["cc", "-std=c99", "-O2"]
        assert spec.extensions == [".c"]


class TestCompilerMatching:
    """Extension-based compiler selection."""

    def test_match_by_extension(self):
        """Test that the first registered compiler for an extension wins."""
        assert match_compiler("x/t.cu", DEFAULT_REGISTRY).id == "nvcc"
        assert match_compiler("t.hip", DEFAULT_REGISTRY).id == "hipcc"
        assert [spec.id for spec in matching_compilers("t.c", DEFAULT_REGISTRY)] == ["cc", "gcc", "clang"]

    def test_unmatched_extension(self):
        """Test that an unknown extension raises with the extension attached."""
        with pytest.raises(UnmatchedExtensionError) as exc_info:
            match_compiler("t.f90", DEFAULT_REGISTRY)
        assert exc_info.value.extension == ".f90"

    def test_empty_registry(self):
        """Test that matching against an empty registry fails."""
        with pytest.raises(ConfigurationError):
            match_compiler("t.c", [])


class TestRegistryFile:
    """Loading registries from JSON."""

    def test_default_registry(self):
        """Test that no path gives the built-in registry."""
        assert load_registry() == DEFAULT_REGISTRY

    def test_load(self, tmp_path):
        """Test loading a registry entry and its defaults."""
        path = tmp_path / "registry.json"
        path.write_text(json.dumps([{"id": "cc", "command": "cc", "extensions": [".c"]}]))
        registry = load_registry(path)
        assert registry[0].opt_flag_map[OptLevel.O3_FM] == ["-O3"]
        assert registry[0].fast_math_flag == "-ffast-math"

    @pytest.mark.parametrize(
        "content",
        ["[]", "{not json", json.dumps([{"id": "cc", "command": "cc", "extensions": []}])],
    )
    def test_invalid(self, tmp_path, content):
        """Test that empty, malformed or invalid registries are rejected."""
        path = tmp_path / "registry.json"
        path.write_text(content)
        with pytest.raises(ConfigurationError):
            load_registry(path)

    def test_missing(self, tmp_path):
        """Test that a missing registry file is a configuration error."""
        with pytest.raises(ConfigurationError):
            load_registry(tmp_path / "absent.json")

    def test_partial_opt_flag_map(self, tmp_path):
        """Test that a flag map must cover every level."""
        path = tmp_path / "registry.json"
        entry = {"id": "cc", "command": "cc", "extensions": [".c"], "opt_flag_map": {"O0": ["-O0"]}}
        path.write_text(json.dumps([entry]))
        with pytest.raises(ConfigurationError):
            load_registry(path)


class TestHarness:
    """Compile and run against the host C compiler."""

    def test_invalid_jobs(self, work_dir):
        """Test that the harness needs at least one job slot."""
        with pytest.raises(ConfigurationError):
            Harness(work_dir, jobs=0)

    @pytest.mark.asyncio
    async def test_echo_comp(self, host_cc_spec, work_dir):
        """Test compiling and running a program that prints comp unchanged."""
        ast = scalar_program()
        bundle = emit_source(ast, Dialect.PORTABLE_C)
        record = await Harness(work_dir).compile_and_run(
            bundle, host_cc_spec, OptLevel.O0, inputs_for(ast, "+3.5000E0 1 +1.0000E0 +2.0000E0")
        )
        assert record.status is RunStatus.OK
        assert record.raw_stdout.strip() == "0x1.cp+1"
        assert record.outcome.tag is OutcomeTag.NUMBER
        assert record.outcome.value == 3.5
        assert record.exit_status == 0
        assert record.wall_time > 0

    @pytest.mark.asyncio
    async def test_compiles_once_per_level(self, host_cc_spec, work_dir):
        """Test that each level compiles once and records come back ordered."""
        ast = scalar_program(Accumulate("+=", BinOp("*", v("var_2"), v("var_3"))))
        bundle = emit_source(ast, Dialect.PORTABLE_C, test_id="mul")
        harness = Harness(work_dir, jobs=4)
        jobs = [
            RunJob(bundle, host_cc_spec, level, inputs_for(ast, f"+0.0000E0 1 +{i}.0000E0 +2.0000E0"), i)
            for level in (OptLevel.O3_FM, OptLevel.O0)
            for i in range(1, 6)
        ]
        records = await harness.run_jobs(jobs)
        assert harness.compile_count == 2
        assert [(r.input_index, r.opt_level) for r in records] == [
            (i, level) for i in range(1, 6) for level in (OptLevel.O0, OptLevel.O3_FM)
        ]
        assert [r.outcome.value for r in records] == [2.0 * i for i in range(1, 6) for _ in range(2)]
        assert (work_dir / "mul" / "mul.c").exists()
        assert (work_dir / "mul" / f"mul.{host_cc_spec.id}.O3_FM").exists()

    @pytest.mark.asyncio
    async def test_compile_error(self, host_cc_spec, work_dir):
        """Test that a compile failure is recorded and cached."""
        harness = Harness(work_dir)
        bundle = _c_bundle("broken", "this is not C\n")
        input_vector = inputs_for(scalar_program(), "+1.0000E0 1 +1.0000E0 +1.0000E0")
        first = await harness.compile_and_run(bundle, host_cc_spec, OptLevel.O0, input_vector)
        second = await harness.compile_and_run(bundle, host_cc_spec, OptLevel.O0, input_vector, 1)
        assert first.status is RunStatus.COMPILE_ERROR and second.status is RunStatus.COMPILE_ERROR
        assert first.diagnostics
        assert harness.compile_count == 1

    @pytest.mark.asyncio
    async def test_timeout(self, host_cc_spec, work_dir):
        """Test that a run past the harness timeout becomes a timeout record."""
        bundle = _c_bundle("spin", "int main(void) { volatile int x = 0; for (;;) { x++; } }\n")
        record = await Harness(work_dir, timeout=0.5).compile_and_run(
            bundle, host_cc_spec, OptLevel.O0, inputs_for(scalar_program(), "+1.0000E0 1 +1.0000E0 +1.0000E0")
        )
        assert record.status is RunStatus.TIMEOUT
        assert record.outcome is None

    @pytest.mark.asyncio
    async def test_registry_timeout_applies(self, host_cc_spec, work_dir):
        """Test that a registry entry's timeout kills a slow binary when no override is given."""
        spec = host_cc_spec.model_copy(update={"timeout": 0.5})
        bundle = _c_bundle("sleepy", "#include <unistd.h>\nint main(void) { sleep(3); return 0; }\n")
        harness = get_harness(str(work_dir))
        assert harness.timeout is None
        record = await harness.compile_and_run(
            bundle, spec, OptLevel.O0, inputs_for(scalar_program(), "+1.0000E0 1 +1.0000E0 +1.0000E0")
        )
        assert record.status is RunStatus.TIMEOUT
        assert record.wall_time < 2.5

    def test_registry_timeout_default(self):
        """Test that registry entries default to the configured run timeout."""
        spec = CompilerSpec(id="x", command="cc", extensions=[".c"])
        assert spec.timeout == settings.DEFAULT_TIMEOUT
        assert CompilerSpec(id="x", command="cc", extensions=[".c"], timeout=0.5).timeout == 0.5

    @pytest.mark.asyncio
    async def test_nonzero_exit(self, host_cc_spec, work_dir):
        """Test that a nonzero exit becomes a runtime failure with stderr."""
        source = '#include <stdio.h>\nint main(void) { fprintf(stderr, "boom\\n"); return 3; }\n'
        record = await Harness(work_dir).compile_and_run(
            _c_bundle("exit3", source), host_cc_spec, OptLevel.O0,
            inputs_for(scalar_program(), "+1.0000E0 1 +1.0000E0 +1.0000E0"),
        )
        assert record.status is RunStatus.RUNTIME_FAILURE
        assert record.exit_status == 3
        assert "boom" in record.diagnostics

    @pytest.mark.asyncio
    async def test_unparseable_output(self, host_cc_spec, work_dir):
        """Test that unexpected output becomes a parse error."""
        source = '#include <stdio.h>\nint main(void) { printf("hello\\n"); return 0; }\n'
        record = await Harness(work_dir).compile_and_run(
            _c_bundle("hello", source), host_cc_spec, OptLevel.O0,
            inputs_for(scalar_program(), "+1.0000E0 1 +1.0000E0 +1.0000E0"),
        )
        assert record.status is RunStatus.PARSE_ERROR
        assert record.raw_stdout == "hello\n"

    @pytest.mark.asyncio
    async def test_missing_compiler(self, work_dir):
        """Test that a missing compiler executable is a compile error."""
        spec = CompilerSpec(id="ghost", command="/nonexistent/ghost-cc", extensions=[".c"])
        record = await Harness(work_dir).compile_and_run(
            _c_bundle("ghost", "int main(void) { return 0; }\n"), spec, OptLevel.O0,
            inputs_for(scalar_program(), "+1.0000E0 1 +1.0000E0 +1.0000E0"),
        )
        assert record.status is RunStatus.COMPILE_ERROR
