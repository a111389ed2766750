"""
Campaign orchestration: generate, emit, run, persist and merge.
"""
import asyncio
import platform
import socket
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import structlog
from pydantic import ValidationError

from fpdiff.core.entities.comparison import (
    ComparisonRecord,
    ComparisonSide,
    MergeResult,
    RunKey,
    UnavailableRun,
)
from fpdiff.core.entities.execution import (
    OPT_LEVEL_ORDER,
    Dialect,
    ExecutionRecord,
    InputVector,
    OptLevel,
    RunStatus,
    SourceBundle,
)
from fpdiff.core.entities.outcome import DiscrepancyClass, OutcomeTag
from fpdiff.core.entities.precision import Precision
from fpdiff.core.entities.program import ProgramAst, ast_from_dict, ast_to_dict
from fpdiff.core.repositories.metadata_repository import MetadataRepository
from fpdiff.core.services.classifier import compare_outcomes, parse_outcome
from fpdiff.core.services.emitter import emit_source, hipify_lite
from fpdiff.core.services.harness import (
    Harness,
    RunJob,
    compiler_available,
    compiler_version,
    matching_compilers,
)
from fpdiff.core.services.input_generator import generate_input_vectors, input_vector_from_strings
from fpdiff.core.services.program_generator import ast_signature, derive_program_config, generate_program
from fpdiff.exceptions import ConfigurationError, SchemaVersionError
from fpdiff.schemas.compiler import CompilerSpec
from fpdiff.schemas.generation import GenConfig, InputSettings
from fpdiff.schemas.metadata import (
    CampaignConfig,
    CampaignMetadata,
    PlatformInfo,
    ProgramEntry,
    RunSummary,
    SourceEntry,
)
from fpdiff.schemas.report import (
    ComparisonModel,
    ComparisonSideModel,
    MergeDocument,
    RunKeyModel,
    UnavailableRunModel,
)

logger = structlog.get_logger()

# Structural duplicates within a batch are regenerated up to this many times.
MAX_REGENERATIONS = 32


@dataclass
class PreparedTest:
    """A generated program with its sources and inputs."""

    test_id: str
    ast: ProgramAst
    bundles: Dict[Dialect, SourceBundle]
    inputs: List[InputVector]


def platform_info(compiler_versions: Optional[Dict[str, str]] = None) -> PlatformInfo:
    return PlatformInfo(
        hostname=socket.gethostname(),
        os_label=platform.platform(),
        compiler_versions=dict(compiler_versions or {}),
    )


def emit_bundles(
    ast: ProgramAst,
    test_id: str,
    dialects: Sequence[Dialect],
    array_length: int,
    hipify: bool = False,
    decimal_echo: bool = False,
    hipify_path: Optional[str] = None,
) -> Dict[Dialect, SourceBundle]:
    """Sources of one program; with `hipify` the HIP source is converted from the CUDA one."""
    bundles = {}
    for dialect in dialects:
        if dialect is Dialect.HIP and hipify:
            cuda = emit_source(ast, Dialect.CUDA, test_id, array_length, decimal_echo)
            bundles[dialect] = SourceBundle(
                test_id=test_id,
                dialect=Dialect.HIP,
                source_text=hipify_lite(cuda.source_text, hipify_path),
                precision=ast.precision,
            )
        else:
            bundles[dialect] = emit_source(ast, dialect, test_id, array_length, decimal_echo)
    return bundles


def prepare_tests(config: CampaignConfig, hipify_path: Optional[str] = None) -> List[PreparedTest]:
    """Generate programs, sources and inputs; a pure function of the configuration."""
    tests: List[PreparedTest] = []
    seen = set()
    for index in range(config.start_index, config.start_index + config.num_programs):
        for attempt in range(MAX_REGENERATIONS):
            ast = generate_program(derive_program_config(config.generation, index, attempt))
            test_id = ast_signature(ast)
            if test_id not in seen:
                break
        else:
            test_id = f"{test_id}-{index}"
        seen.add(test_id)

        inputs = generate_input_vectors(
            ast,
            config.inputs.count,
            config.inputs.seed,
            class_weights=config.inputs.class_weights,
            loop_bound_range=config.generation.loop_bound_range,
            test_id=test_id,
        )
        bundles = emit_bundles(
            ast,
            test_id,
            config.dialects,
            config.array_length,
            hipify=config.hipify,
            decimal_echo=config.decimal_echo,
            hipify_path=hipify_path,
        )
        tests.append(PreparedTest(test_id, ast, bundles, inputs))

    logger.info("Programs prepared", count=len(tests), dialects=[d.value for d in config.dialects])
    return tests


def make_campaign_config(
    generation: GenConfig,
    inputs: InputSettings,
    num_programs: int,
    dialects: Sequence[Dialect],
    levels: Sequence[OptLevel] = OPT_LEVEL_ORDER,
    start_index: int = 0,
    hipify: bool = False,
    decimal_echo: bool = False,
) -> CampaignConfig:
    if not dialects:
        raise ConfigurationError("At least one dialect is required")
    if hipify and Dialect.HIP not in dialects:
        raise ConfigurationError("--hipify needs the HIP dialect")
    try:
        return CampaignConfig(
            generation=generation,
            inputs=inputs,
            num_programs=num_programs,
            start_index=start_index,
            dialects=list(dialects),
            levels=list(levels),
            array_length=generation.array_length,
            hipify=hipify,
            decimal_echo=decimal_echo,
        )
    except ValidationError as e:
        raise ConfigurationError(f"Invalid campaign configuration: {e}") from e


def build_metadata(
    config: CampaignConfig,
    tests: Iterable[PreparedTest],
    source_dir: Optional[Path] = None,
) -> CampaignMetadata:
    """Metadata of a generated batch (no runs yet)."""
    entries = []
    for test in tests:
        sources = [
            SourceEntry(
                dialect=bundle.dialect,
                path=str(Path(bundle.test_id) / bundle.file_name) if source_dir is not None else None,
                text=bundle.source_text,
            )
            for bundle in test.bundles.values()
        ]
        entries.append(
            ProgramEntry(
                test_id=test.test_id,
                dialects=list(test.bundles),
                sources=sources,
                ast=ast_to_dict(test.ast),
                inputs=[list(vector.argv) for vector in test.inputs],
            )
        )
    return CampaignMetadata(platform=platform_info(), config=config, tests=entries)


def write_sources(tests: Iterable[PreparedTest], out_dir: Path) -> None:
    """Lay sources out as <out_dir>/<test_id>/<test_id>.<ext>, plus inputs.txt."""
    for test in tests:
        test_dir = out_dir / test.test_id
        test_dir.mkdir(parents=True, exist_ok=True)
        for bundle in test.bundles.values():
            (test_dir / bundle.file_name).write_text(bundle.source_text, encoding="utf-8")
        lines = [" ".join(vector.argv) for vector in test.inputs]
        (test_dir / "inputs.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def restore_test(entry: ProgramEntry) -> PreparedTest:
    """Rebuild one test from its metadata entry; sources are taken verbatim."""
    ast = ast_from_dict(entry.ast)
    bundles = {
        dialect: SourceBundle(entry.test_id, dialect, entry.source(dialect).text, ast.precision)
        for dialect in entry.dialects
    }
    inputs = [input_vector_from_strings(ast, entry.test_id, argv) for argv in entry.inputs]
    return PreparedTest(entry.test_id, ast, bundles, inputs)


def restore_tests(metadata: CampaignMetadata) -> List[PreparedTest]:
    return [restore_test(entry) for entry in metadata.tests]



def select_compilers(
    dialects: Sequence[Dialect],
    registry: List[CompilerSpec],
    compiler_ids: Optional[Sequence[str]] = None,
    skip_unavailable: bool = False,
) -> Dict[Dialect, List[CompilerSpec]]:
    """Available compilers per dialect.

    Without explicit ids only the first available match is used for each dialect.
    With `skip_unavailable` a dialect nothing can compile is left out; the selection
    must still cover at least one dialect.
    """
    selected: Dict[Dialect, List[CompilerSpec]] = {}
    for dialect in dialects:
        candidates = [
            spec for spec in matching_compilers(f"kernel{dialect.extension}", registry)
            if compiler_available(spec)
        ]
        if compiler_ids:
            candidates = [spec for spec in candidates if spec.id in compiler_ids]
        else:
            candidates = candidates[:1]
        if not candidates:
            if skip_unavailable:
                logger.warning("Dialect skipped, no available compiler", dialect=dialect.value)
                continue
            raise ConfigurationError(
                f"No available compiler for dialect {dialect.value}",
                {"dialect": dialect.value, "requested": list(compiler_ids or [])},
            )
        selected[dialect] = candidates
    if not selected:
        raise ConfigurationError(
            "No available compiler for any of the dialects",
            {"dialects": [d.value for d in dialects], "requested": list(compiler_ids or [])},
        )
    return selected



def summarize_record(record: ExecutionRecord, dialect: Dialect) -> RunSummary:
    return RunSummary(
        test_id=record.test_id,
        input_index=record.input_index,
        compiler_id=record.compiler_id,
        opt_level=record.opt_level,
        dialect=dialect,
        outcome=record.outcome.render() if record.outcome is not None else None,
        raw_stdout=record.raw_stdout,
        status=record.status,
        exit_status=record.exit_status,
        wall_time=round(record.wall_time, 6),
    )


class CampaignService:
    """Runs campaigns through a harness and persists them through a repository."""

    def __init__(
        self,
        harness: Harness,
        registry: List[CompilerSpec],
        repository: MetadataRepository,
        hipify_path: Optional[str] = None,
    ):
        self.harness = harness
        self.registry = registry
        self.repository = repository
        self.hipify_path = hipify_path

    async def execute(
        self,
        metadata: CampaignMetadata,
        levels: Optional[Sequence[OptLevel]] = None,
        compiler_ids: Optional[Sequence[str]] = None,
        dialects: Optional[Sequence[Dialect]] = None,
    ) -> CampaignMetadata:
        """Run every test of the metadata; returns a copy carrying the run summaries.

        `dialects` and `compiler_ids` narrow the batch to what this host runs. Batch
        dialects without an available compiler are skipped and listed in
        `skipped_dialects`.
        """
        levels = list(levels or metadata.config.levels)
        requested = list(dialects or metadata.config.dialects)
        foreign = [d.value for d in requested if d not in metadata.config.dialects]
        if foreign:
            raise ConfigurationError(
                f"Batch has no sources for {', '.join(foreign)}",
                {"batch_dialects": [d.value for d in metadata.config.dialects]},
            )
        selected = select_compilers(requested, self.registry, compiler_ids, skip_unavailable=True)
        skipped = [d for d in metadata.config.dialects if d not in selected]
        tests = restore_tests(metadata)

        jobs = []
        dialect_of: Dict[str, Dialect] = {}
        for test in tests:
            for dialect, bundle in test.bundles.items():
                for spec in selected.get(dialect, []):
                    dialect_of[spec.id] = dialect
                    for level in levels:
                        for index, vector in enumerate(test.inputs):
                            jobs.append(RunJob(bundle, spec, level, vector, index))

        logger.info("Jobs dispatched", jobs=len(jobs), compilers=sorted(dialect_of))
        records = await self.harness.run_jobs(jobs)

        specs = {spec.id: spec for specs in selected.values() for spec in specs}
        versions = {}
        for spec_id, spec in sorted(specs.items()):
            versions[spec_id] = await asyncio.to_thread(compiler_version, spec)

        runs = [summarize_record(r, dialect_of[r.compiler_id]) for r in records]
        failed = sum(1 for r in records if r.failed)
        logger.info(
            "Campaign executed", runs=len(runs), failed=failed, skipped=[d.value for d in skipped]
        )
        return metadata.model_copy(
            update={
                "platform": platform_info(versions),
                "config": metadata.config.model_copy(update={"levels": levels}),
                "runs": runs,
                "skipped_dialects": skipped,
            }
        )

    async def run_campaign(
        self,
        config: CampaignConfig,
        out_path: Path,
        compiler_ids: Optional[Sequence[str]] = None,
    ) -> CampaignMetadata:
        """Generate, emit and run a batch, then write its metadata atomically."""
        # Fail before generating anything when no compiler can take part.
        select_compilers(config.dialects, self.registry, compiler_ids, skip_unavailable=True)
        tests = prepare_tests(config, self.hipify_path)
        metadata = await self.execute(build_metadata(config, tests), config.levels, compiler_ids)
        await self.repository.save(metadata, out_path)
        return metadata


def concat_shards(shards: Sequence[CampaignMetadata]) -> CampaignMetadata:
    """Concatenate batch shards of one platform by test_id."""
    if not shards:
        raise ConfigurationError("No metadata shards given")
    first = shards[0]
    tests: Dict[str, ProgramEntry] = {}
    runs: Dict[Tuple[str, int, str, OptLevel], RunSummary] = {}
    versions: Dict[str, str] = {}
    for shard in shards:
        if shard.schema_version != first.schema_version:
            raise SchemaVersionError(first.schema_version, shard.schema_version)
        versions.update(shard.platform.compiler_versions)
        for entry in shard.tests:
            existing = tests.get(entry.test_id)
            if existing is not None and existing != entry:
                raise ConfigurationError(f"Shards disagree on test {entry.test_id}")
            tests[entry.test_id] = entry
        for run in shard.runs:
            runs[(run.test_id, run.input_index, run.compiler_id, run.opt_level)] = run
    if len(shards) == 1:
        return first
    ordered_runs = sorted(
        runs.values(),
        key=lambda r: (r.test_id, r.input_index, r.compiler_id, OPT_LEVEL_ORDER.index(r.opt_level)),
    )
    return first.model_copy(
        update={
            "platform": first.platform.model_copy(update={"compiler_versions": versions}),
            "tests": [tests[key] for key in sorted(tests)],
            "runs": ordered_runs,
        }
    )


def parse_cross_level(text: Optional[str]) -> Optional[Tuple[OptLevel, OptLevel]]:
    """Parse "A:B" into two optimization levels."""
    if not text:
        return None
    try:
        left, right = text.split(":")
        return OptLevel(left), OptLevel(right)
    except ValueError:
        raise ConfigurationError(
            f"--cross-level expects LEVEL:LEVEL, got {text!r}",
            {"levels": [level.value for level in OptLevel]},
        ) from None


def _side_runs(
    metadata: CampaignMetadata, side: str, compiler_id: Optional[str]
) -> List[RunSummary]:
    runs = metadata.runs
    if compiler_id is not None:
        runs = [r for r in runs if r.compiler_id == compiler_id]
        if not runs:
            raise ConfigurationError(f"Side {side} has no runs for compiler {compiler_id}")
    compilers = sorted({r.compiler_id for r in runs})
    if len(compilers) > 1:
        raise ConfigurationError(
            f"Side {side} holds runs of several compilers; choose one",
            {"compilers": compilers},
        )
    return runs


def _key(run: RunSummary) -> RunKey:
    return RunKey(run.test_id, run.input_index, run.compiler_id, run.opt_level)


def merge_platforms(
    meta_a: CampaignMetadata,
    meta_b: CampaignMetadata,
    cross_level: Optional[Tuple[OptLevel, OptLevel]] = None,
    compiler_a: Optional[str] = None,
    compiler_b: Optional[str] = None,
    relative_epsilon: Optional[float] = None,
) -> MergeResult:
    """Join two campaigns on (test_id, input_index, opt_level) and classify each pair.

    With `cross_level` side a is taken at the first level and side b at the second.
    """
    if meta_a.schema_version != meta_b.schema_version:
        raise SchemaVersionError(meta_a.schema_version, meta_b.schema_version)
    precision = meta_a.config.generation.precision
    if meta_b.config.generation.precision is not precision:
        raise ConfigurationError("Cannot compare campaigns of different precisions")

    runs_a = _side_runs(meta_a, "a", compiler_a)
    runs_b = _side_runs(meta_b, "b", compiler_b)
    if cross_level is not None:
        runs_a = [r for r in runs_a if r.opt_level is cross_level[0]]
        runs_b = [r for r in runs_b if r.opt_level is cross_level[1]]

    def join_key(run: RunSummary) -> Tuple[str, int, Optional[OptLevel]]:
        return (run.test_id, run.input_index, None if cross_level else run.opt_level)

    index_b = {join_key(r): r for r in runs_b}
    joined_b = set()
    result = MergeResult(
        precision=precision,
        runs_attempted=len(runs_a) + len(runs_b),
        cross_level=cross_level is not None,
    )

    for run_a in runs_a:
        run_b = index_b.get(join_key(run_a))
        if run_b is None:
            result.unmatched_a.append(_key(run_a))
            continue
        joined_b.add(join_key(run_b))
        missing = False
        for side, run in (("a", run_a), ("b", run_b)):
            if run.status is not RunStatus.OK or run.outcome is None:
                result.unavailable.append(UnavailableRun(side, _key(run), run.status))
                missing = True
        if missing:
            continue
        outcome_a = parse_outcome(run_a.outcome, precision)
        outcome_b = parse_outcome(run_b.outcome, precision)
        result.records.append(
            ComparisonRecord(
                test_id=run_a.test_id,
                input_index=run_a.input_index,
                side_a=ComparisonSide(run_a.compiler_id, run_a.opt_level, outcome_a),
                side_b=ComparisonSide(run_b.compiler_id, run_b.opt_level, outcome_b),
                discrepancy=compare_outcomes(outcome_a, outcome_b, relative_epsilon),
            )
        )

    result.unmatched_b = [_key(r) for r in runs_b if join_key(r) not in joined_b]
    logger.info(
        "Platforms merged",
        compared=len(result.records),
        unmatched_a=len(result.unmatched_a),
        unmatched_b=len(result.unmatched_b),
        unavailable=len(result.unavailable),
    )
    return result


def _key_model(key: RunKey) -> RunKeyModel:
    return RunKeyModel(
        test_id=key.test_id, input_index=key.input_index, compiler_id=key.compiler_id, opt_level=key.opt_level
    )


def _key_entity(model: RunKeyModel) -> RunKey:
    return RunKey(model.test_id, model.input_index, model.compiler_id, model.opt_level)


def merge_to_document(result: MergeResult) -> MergeDocument:
    return MergeDocument(
        precision=result.precision,
        cross_level=result.cross_level,
        runs_attempted=result.runs_attempted,
        records=[
            ComparisonModel(
                test_id=r.test_id,
                input_index=r.input_index,
                side_a=ComparisonSideModel(
                    compiler_id=r.side_a.compiler_id, opt_level=r.side_a.opt_level, outcome=r.side_a.outcome.render()
                ),
                side_b=ComparisonSideModel(
                    compiler_id=r.side_b.compiler_id, opt_level=r.side_b.opt_level, outcome=r.side_b.outcome.render()
                ),
                discrepancy=r.discrepancy.tag,
                direction=list(r.discrepancy.direction),
            )
            for r in result.records
        ],
        unmatched_a=[_key_model(k) for k in result.unmatched_a],
        unmatched_b=[_key_model(k) for k in result.unmatched_b],
        unavailable=[
            UnavailableRunModel(side=u.side, status=u.status, **_key_model(u.key).model_dump())
            for u in result.unavailable
        ],
    )


def merge_from_document(document: MergeDocument) -> MergeResult:
    precision: Precision = document.precision
    records = []
    for model in document.records:
        side_a = ComparisonSide(
            model.side_a.compiler_id, model.side_a.opt_level, parse_outcome(model.side_a.outcome, precision)
        )
        side_b = ComparisonSide(
            model.side_b.compiler_id, model.side_b.opt_level, parse_outcome(model.side_b.outcome, precision)
        )
        direction: Tuple[OutcomeTag, OutcomeTag] = (model.direction[0], model.direction[1])
        records.append(
            ComparisonRecord(
                test_id=model.test_id,
                input_index=model.input_index,
                side_a=side_a,
                side_b=side_b,
                discrepancy=DiscrepancyClass(model.discrepancy, direction),
            )
        )
    return MergeResult(
        precision=precision,
        records=records,
        unmatched_a=[_key_entity(k) for k in document.unmatched_a],
        unmatched_b=[_key_entity(k) for k in document.unmatched_b],
        unavailable=[
            UnavailableRun(u.side, RunKey(u.test_id, u.input_index, u.compiler_id, u.opt_level), u.status)
            for u in document.unavailable
        ],
        runs_attempted=document.runs_attempted,
        cross_level=document.cross_level,
    )
