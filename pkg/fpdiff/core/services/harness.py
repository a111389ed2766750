"""
Compiler matching, compile command construction and binary execution.
"""
import asyncio
import json
import os
import shutil
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import structlog
from pydantic import ValidationError

from fpdiff.core.entities.execution import (
    OPT_LEVEL_ORDER,
    ExecutionRecord,
    InputVector,
    OptLevel,
    RunStatus,
    SourceBundle,
)
from fpdiff.core.services.classifier import parse_outcome
from fpdiff.exceptions import CompileError, ConfigurationError, OutcomeParseError, UnmatchedExtensionError
from fpdiff.schemas.compiler import CompilerRegistry, CompilerSpec

logger = structlog.get_logger()

COMPILE_TIMEOUT = 120.0

DEFAULT_REGISTRY: List[CompilerSpec] = [
    CompilerSpec(id="nvcc", command="nvcc", extensions=[".cu"], fast_math_flag="--use_fast_math"),
    CompilerSpec(id="hipcc", command="hipcc", extensions=[".hip"], fast_math_flag="-DHIP_FAST_MATH"),
    CompilerSpec(id="cc", command="cc", extensions=[".c"], link_args=["-lm"]),
    CompilerSpec(id="gcc", command="gcc", extensions=[".c"], link_args=["-lm"]),
    CompilerSpec(id="clang", command="clang", extensions=[".c"], link_args=["-lm"]),
]

CompileKey = Tuple[str, str, OptLevel]


def load_registry(path: Optional[Union[str, Path]] = None) -> List[CompilerSpec]:
    """Read a registry file (a JSON array of compiler specs); no path gives the defaults."""
    if path is None:
        return list(DEFAULT_REGISTRY)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        registry = CompilerRegistry(compilers=data).compilers
    except FileNotFoundError:
        raise ConfigurationError(f"Compiler registry not found: {path}") from None
    except (json.JSONDecodeError, ValidationError) as e:
        raise ConfigurationError(f"Invalid compiler registry {path}", {"error": str(e)}) from None
    if not registry:
        raise ConfigurationError(f"Compiler registry {path} is empty")
    return registry


def matching_compilers(source_path: Union[str, Path], registry: List[CompilerSpec]) -> List[CompilerSpec]:
    extension = Path(source_path).suffix
    return [spec for spec in registry if extension in spec.extensions]


def match_compiler(source_path: Union[str, Path], registry: List[CompilerSpec]) -> CompilerSpec:
    """First registered compiler handling the file's extension."""
    if not registry:
        raise ConfigurationError("Compiler registry is empty")
    matches = matching_compilers(source_path, registry)
    if not matches:
        raise UnmatchedExtensionError(Path(source_path).suffix)
    return matches[0]


def build_command(
    spec: CompilerSpec, level: OptLevel, src: Union[str, Path], out: Union[str, Path]
) -> List[str]:
    argv = [spec.command, *spec.extra_args, *spec.opt_flag_map[level]]
    if level is OptLevel.O3_FM:
        argv.append(spec.fast_math_flag)
    argv.append(str(src))
    argv.extend(spec.output_args)
    argv.append(str(out))
    argv.extend(spec.link_args)
    return argv


def compiler_available(spec: CompilerSpec) -> bool:
    return shutil.which(spec.command) is not None


def compiler_version(spec: CompilerSpec) -> str:
    """First line of `<command> --version`, or "unavailable"."""
    try:
        completed = subprocess.run(
            [spec.command, "--version"], capture_output=True, text=True, timeout=30
        )
    except (OSError, subprocess.TimeoutExpired):
        return "unavailable"
    lines = (completed.stdout or completed.stderr).strip().splitlines()
    return lines[0] if lines else "unknown"


@dataclass(frozen=True)
class RunJob:
    bundle: SourceBundle
    spec: CompilerSpec
    level: OptLevel
    input_vector: InputVector
    input_index: int


def record_sort_key(record: ExecutionRecord) -> Tuple[str, int, str, int]:
    return (
        record.test_id,
        record.input_index,
        record.compiler_id,
        OPT_LEVEL_ORDER.index(record.opt_level),
    )


class Harness:
    """Compiles bundles once per (test, compiler, level) and runs them on input vectors."""

    def __init__(self, work_dir: Union[str, Path], jobs: int = 1, timeout: Optional[float] = None):
        if jobs < 1:
            raise ConfigurationError(f"jobs must be at least 1, got {jobs}")
        self.work_dir = Path(work_dir)
        self.timeout = timeout
        self._slots = asyncio.Semaphore(jobs)
        self._locks: Dict[CompileKey, asyncio.Lock] = {}
        self._binaries: Dict[CompileKey, Path] = {}
        self._failures: Dict[CompileKey, CompileError] = {}
        self.compile_count = 0

    def _write_source(self, bundle: SourceBundle) -> Path:
        test_dir = self.work_dir / bundle.test_id
        test_dir.mkdir(parents=True, exist_ok=True)
        src = test_dir / bundle.file_name
        if not src.exists() or src.read_text(encoding="utf-8") != bundle.source_text:
            src.write_text(bundle.source_text, encoding="utf-8")
        return src

    async def compile(self, bundle: SourceBundle, spec: CompilerSpec, level: OptLevel) -> Path:
        """Path of the binary for (test, compiler, level); compiles on first use."""
        key = (bundle.test_id, spec.id, level)
        lock = self._locks.setdefault(key, asyncio.Lock())
        async with lock:
            if key in self._failures:
                raise self._failures[key]
            if key in self._binaries:
                return self._binaries[key]

            src = self._write_source(bundle)
            out = src.parent / f"{bundle.test_id}.{spec.id}.{level.value}"
            argv = build_command(spec, level, src, out)
            logger.debug("Compilation started", test_id=bundle.test_id, compiler=spec.id, level=level.value)

            async with self._slots:
                try:
                    proc = await asyncio.create_subprocess_exec(
                        *argv, stdout=asyncio.subprocess.PIPE, stderr=asyncio.subprocess.STDOUT
                    )
                    try:
                        output, _ = await asyncio.wait_for(proc.communicate(), COMPILE_TIMEOUT)
                    except asyncio.TimeoutError:
                        proc.kill()
                        await proc.wait()
                        output = b"compilation timed out"
                    diagnostics = output.decode(errors="replace")
                    returncode = proc.returncode
                except OSError as e:
                    diagnostics = str(e)
                    returncode = -1

            self.compile_count += 1
            if returncode != 0:
                error = CompileError(
                    f"{spec.id} failed to compile {bundle.test_id} at {level.value}", diagnostics
                )
                self._failures[key] = error
                logger.warning(
                    "Compilation failed", test_id=bundle.test_id, compiler=spec.id, level=level.value
                )
                raise error

            self._binaries[key] = out
            logger.debug("Compilation finished", test_id=bundle.test_id, compiler=spec.id, level=level.value)
            return out

    async def compile_and_run(
        self,
        bundle: SourceBundle,
        spec: CompilerSpec,
        level: OptLevel,
        input_vector: InputVector,
        input_index: int = 0,
    ) -> ExecutionRecord:
        """Run one input vector through the (cached) binary; failures become records."""
        record = ExecutionRecord(
            test_id=bundle.test_id, input_index=input_index, compiler_id=spec.id, opt_level=level
        )
        try:
            binary = await self.compile(bundle, spec, level)
        except CompileError as e:
            record.status = RunStatus.COMPILE_ERROR
            record.diagnostics = e.diagnostics
            return record

        timeout = self.timeout if self.timeout is not None else spec.timeout
        async with self._slots:
            start_time = time.perf_counter()
            try:
                proc = await asyncio.create_subprocess_exec(
                    os.fspath(binary),
                    *input_vector.argv,
                    stdout=asyncio.subprocess.PIPE,
                    stderr=asyncio.subprocess.PIPE,
                )
            except OSError as e:
                record.status = RunStatus.RUNTIME_FAILURE
                record.exit_status = -1
                record.diagnostics = str(e)
                return record
            try:
                stdout, stderr = await asyncio.wait_for(proc.communicate(), timeout)
            except asyncio.TimeoutError:
                proc.kill()
                await proc.wait()
                record.status = RunStatus.TIMEOUT
                record.exit_status = proc.returncode if proc.returncode is not None else -1
                record.wall_time = time.perf_counter() - start_time
                logger.warning("Run timed out", test_id=bundle.test_id, compiler=spec.id, level=level.value)
                return record
            record.wall_time = time.perf_counter() - start_time

        record.raw_stdout = stdout.decode(errors="replace")
        record.exit_status = proc.returncode
        if proc.returncode != 0:
            record.status = RunStatus.RUNTIME_FAILURE
            record.diagnostics = stderr.decode(errors="replace")
            logger.warning(
                "Run failed",
                test_id=bundle.test_id,
                compiler=spec.id,
                level=level.value,
                exit_status=proc.returncode,
            )
            return record

        try:
            record.outcome = parse_outcome(record.raw_stdout, bundle.precision)
        except OutcomeParseError:
            record.status = RunStatus.PARSE_ERROR
        return record

    async def run_jobs(self, jobs: Iterable[RunJob]) -> List[ExecutionRecord]:
        """Run all jobs concurrently; records come back in deterministic order."""
        records = await asyncio.gather(
            *(
                self.compile_and_run(job.bundle, job.spec, job.level, job.input_vector, job.input_index)
                for job in jobs
            )
        )
        return sorted(records, key=record_sort_key)
