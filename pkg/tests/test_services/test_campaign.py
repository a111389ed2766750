"""
Tests for campaign orchestration and cross-platform merging.
"""
import pytest
from pydantic import ValidationError

from fpdiff.core.entities.execution import Dialect, OptLevel, RunStatus
from fpdiff.core.entities.outcome import DiscrepancyTag, OutcomeTag
from fpdiff.core.entities.precision import Precision
from fpdiff.core.services.campaign import (
    CampaignService,
    build_metadata,
    concat_shards,
    make_campaign_config,
    merge_from_document,
    merge_platforms,
    merge_to_document,
    parse_cross_level,
    prepare_tests,
    restore_tests,
    select_compilers,
    write_sources,
)
from fpdiff.core.services.classifier import compare_outcomes, parse_outcome
from fpdiff.core.services.emitter import emit_source
from fpdiff.core.services.harness import Harness
from fpdiff.core.services.oracle import interpret
from fpdiff.core.services.program_generator import ast_signature
from fpdiff.core.services.report import report_from_merge
from fpdiff.exceptions import ConfigurationError, SchemaVersionError
from fpdiff.infrastructure.storage.json_metadata_repository import JsonMetadataRepository, dump_model
from fpdiff.schemas.compiler import CompilerSpec
from fpdiff.schemas.generation import make_gen_config, make_input_settings
from fpdiff.schemas.metadata import CampaignMetadata, RunSummary
from tests.conftest import requires_host_cc


def _config(num_programs=2, count=2, dialects=(Dialect.PORTABLE_C,), levels=(OptLevel.O0,), **kwargs):
    precision = kwargs.pop("precision", Precision.FP64)
    return make_campaign_config(
        generation=make_gen_config(seed=7, precision=precision, **kwargs.pop("generation", {})),
        inputs=make_input_settings(count=count, seed=7),
        num_programs=num_programs,
        dialects=list(dialects),
        levels=list(levels),
        **kwargs,
    )


def _metadata(config=None) -> CampaignMetadata:
    config = config or _config()
    return build_metadata(config, prepare_tests(config))


def _with_runs(metadata, compiler_id="gcc", levels=(OptLevel.O0,), outcome="0x1p+0", overrides=None):
    """Metadata with one synthetic run per (test, input, level)."""
    overrides = overrides or {}
    runs = []
    for entry in metadata.tests:
        for index in range(len(entry.inputs)):
            for level in levels:
                key = (entry.test_id, index, level)
                text, status = overrides.get(key, (outcome, RunStatus.OK))
                runs.append(
                    RunSummary(
                        test_id=entry.test_id,
                        input_index=index,
                        compiler_id=compiler_id,
                        opt_level=level,
                        dialect=Dialect.PORTABLE_C,
                        outcome=text,
                        status=status,
                    )
                )
    return metadata.model_copy(update={"runs": runs})


class TestPreparation:
    """Generation of program batches."""

    def test_batch_shape(self):
        """Test the tests and bundles of a small batch."""
        tests = prepare_tests(_config(dialects=(Dialect.CUDA, Dialect.PORTABLE_C)))
        assert len(tests) == 2
        assert len({t.test_id for t in tests}) == 2
        for test in tests:
            assert set(test.bundles) == {Dialect.CUDA, Dialect.PORTABLE_C}
            assert len(test.inputs) == 2
            assert all(v.test_id == test.test_id for v in test.inputs)

    def test_deterministic(self):
        """Test that the same config gives the same batch."""
        first = prepare_tests(_config(num_programs=5))
        second = prepare_tests(_config(num_programs=5))
        assert [(t.test_id, t.bundles, t.inputs) for t in first] == [(t.test_id, t.bundles, t.inputs) for t in second]

    def test_start_index_continues_the_batch(self):
        """Test that a shard with a start index continues a batch."""
        whole = prepare_tests(_config(num_programs=4))
        tail = prepare_tests(_config(num_programs=2, start_index=2))
        assert [t.test_id for t in whole[2:]] == [t.test_id for t in tail]

    def test_duplicates_are_regenerated(self):
        """Test that a batch of mostly tiny programs holds no structural duplicates."""
        generation = {
            "max_stmts_per_block": 1,
            "max_loop_nesting": 0,
            "max_expr_nodes": 1,
            "num_fp_params": 2,
            "math_probability": 0.0,
        }
        tests = prepare_tests(_config(num_programs=150, count=0, generation=generation))
        signatures = [ast_signature(t.ast) for t in tests]
        assert len(set(signatures)) == len(signatures)
        assert all(t.test_id == ast_signature(t.ast) for t in tests)

    def test_hipify_sources(self):
        """Test that hipified CUDA matches natively emitted HIP."""
        tests = prepare_tests(_config(num_programs=3, dialects=(Dialect.CUDA, Dialect.HIP), hipify=True))
        for test in tests:
            native = emit_source(test.ast, Dialect.HIP, test.test_id)
            assert test.bundles[Dialect.HIP].source_text == native.source_text

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dialects": ()},
            {"dialects": (Dialect.CUDA,), "hipify": True},
            {"num_programs": -1},
        ],
    )
    def test_invalid_config(self, kwargs):
        """Test that invalid campaign settings raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            _config(**kwargs)


class TestMetadata:
    """Metadata construction and persistence layout."""

    def test_round_trip_is_byte_stable(self):
        """Test that metadata reloads to the same bytes."""
        text = dump_model(_with_runs(_metadata()))
        assert dump_model(CampaignMetadata.model_validate_json(text)) == text

    def test_restore_tests(self):
        """Test that restored tests match the prepared ones."""
        config = _config(dialects=(Dialect.CUDA, Dialect.PORTABLE_C))
        tests = prepare_tests(config)
        restored = restore_tests(build_metadata(config, tests))
        for original, copy in zip(tests, restored):
            assert copy.test_id == original.test_id
            assert copy.ast == original.ast
            assert copy.bundles == original.bundles
            assert [v.argv for v in copy.inputs] == [v.argv for v in original.inputs]

    def test_write_sources(self, tmp_path):
        """Test that sources are written under their test directory."""
        tests = prepare_tests(_config(count=3))
        write_sources(tests, tmp_path)
        for test in tests:
            assert (tmp_path / test.test_id / f"{test.test_id}.c").read_text() == test.bundles[
                Dialect.PORTABLE_C
            ].source_text
            lines = (tmp_path / test.test_id / "inputs.txt").read_text().splitlines()
            assert lines == [" ".join(v.argv) for v in test.inputs]

    def test_run_must_reference_a_test(self):
        """Test that a run for an unknown test fails validation."""
        metadata = _with_runs(_metadata())
        data = metadata.model_dump()
        data["runs"][0]["test_id"] = "missing"
        with pytest.raises(ValidationError):
            CampaignMetadata.model_validate(data)
        data["runs"][0]["test_id"] = metadata.tests[0].test_id
        data["runs"][0]["input_index"] = 99
        with pytest.raises(ValidationError):
            CampaignMetadata.model_validate(data)

    def test_failed_runs(self):
        """Test counting runs without a result."""
        metadata = _metadata()
        key = (metadata.tests[0].test_id, 0, OptLevel.O0)
        metadata = _with_runs(metadata, overrides={key: (None, RunStatus.TIMEOUT)})
        assert metadata.failed_runs == 1


class TestCompilerSelection:
    """Choosing compilers per dialect."""

    def test_no_available_compiler(self):
        """Test that a missing compiler raises ConfigurationError."""
        ghost = CompilerSpec(id="ghost", command="/nonexistent/cc", extensions=[".c"])
        with pytest.raises(ConfigurationError):
            select_compilers([Dialect.PORTABLE_C], [ghost])

    def test_first_available_only(self, host_cc_spec):
        """Test that only the first available compiler is picked unless ids are given."""
        second = host_cc_spec.model_copy(update={"id": "second"})
        selected = select_compilers([Dialect.PORTABLE_C], [host_cc_spec, second])
        assert [s.id for s in selected[Dialect.PORTABLE_C]] == [host_cc_spec.id]
        both = select_compilers([Dialect.PORTABLE_C], [host_cc_spec, second], [host_cc_spec.id, "second"])
        assert len(both[Dialect.PORTABLE_C]) == 2

    def test_skip_unavailable_dialects(self, host_cc_spec):
        """Test that dialects without a compiler are left out when skipping is allowed."""
        selected = select_compilers([Dialect.CUDA, Dialect.PORTABLE_C], [host_cc_spec], skip_unavailable=True)
        assert list(selected) == [Dialect.PORTABLE_C]
        with pytest.raises(ConfigurationError):
            select_compilers([Dialect.CUDA, Dialect.HIP], [host_cc_spec], skip_unavailable=True)
        with pytest.raises(ConfigurationError):
            select_compilers([Dialect.CUDA, Dialect.PORTABLE_C], [host_cc_spec])


class TestMerge:
    """Joining two platforms' metadata."""

    def test_self_merge_is_consistent(self):
        """Test that merging a batch with itself finds no discrepancy."""
        metadata = _with_runs(_metadata(), levels=(OptLevel.O0, OptLevel.O3_FM))
        result = merge_platforms(metadata, metadata)
        assert len(result.records) == 8
        assert all(r.discrepancy.tag is DiscrepancyTag.CONSISTENT for r in result.records)
        assert result.runs_attempted == 16
        assert not result.unmatched_a and not result.unmatched_b and not result.unavailable
        summary = report_from_merge(result).summary
        assert summary.total_programs == 2
        assert summary.runs_per_option_per_compiler == 4

    def test_discrepancy_direction(self):
        """Test that the first side is side a."""
        metadata = _metadata()
        key = (metadata.tests[1].test_id, 1, OptLevel.O0)
        side_a = _with_runs(metadata, compiler_id="nvcc", overrides={key: ("inf", RunStatus.OK)})
        side_b = _with_runs(metadata, compiler_id="hipcc")
        records = merge_platforms(side_a, side_b).records
        differing = [r for r in records if r.discrepancy.is_discrepancy]
        assert len(differing) == 1
        assert differing[0].discrepancy.tag is DiscrepancyTag.INF_VS_NUM
        assert differing[0].discrepancy.direction == (OutcomeTag.INF, OutcomeTag.NUMBER)
        assert differing[0].side_a.compiler_id == "nvcc"

    def test_unmatched_and_unavailable(self):
        """Test the counts of unmatched and unavailable runs."""
        metadata = _metadata()
        first, second = metadata.tests[0].test_id, metadata.tests[1].test_id
        side_a = _with_runs(metadata, overrides={(first, 0, OptLevel.O0): (None, RunStatus.COMPILE_ERROR)})
        side_b = _with_runs(metadata)
        side_b = side_b.model_copy(update={"runs": [r for r in side_b.runs if r.test_id != second]})
        result = merge_platforms(side_a, side_b)
        assert len(result.records) == 1
        assert [(k.test_id, k.input_index) for k in result.unmatched_a] == [(second, 0), (second, 1)]
        assert result.unmatched_b == []
        assert [(u.side, u.status) for u in result.unavailable] == [("a", RunStatus.COMPILE_ERROR)]
        assert result.runs_attempted == 6

    def test_cross_level(self):
        """Test comparing two levels of one platform."""
        metadata = _metadata()
        key = (metadata.tests[0].test_id, 0, OptLevel.O3_FM)
        runs = _with_runs(
            metadata, levels=(OptLevel.O0, OptLevel.O3_FM), overrides={key: ("-0x0p+0", RunStatus.OK)}
        )
        result = merge_platforms(runs, runs, cross_level=(OptLevel.O0, OptLevel.O3_FM))
        assert result.cross_level
        assert len(result.records) == 4
        assert {r.level_label for r in result.records} == {"O0:O3_FM"}
        assert sum(r.discrepancy.tag is DiscrepancyTag.NUM_VS_ZERO for r in result.records) == 1

    def test_several_compilers_need_a_choice(self):
        """Test that a side with several compilers needs a compiler id."""
        metadata = _metadata()
        mixed = _with_runs(metadata)
        other = _with_runs(metadata, compiler_id="clang")
        mixed = mixed.model_copy(update={"runs": mixed.runs + other.runs})
        with pytest.raises(ConfigurationError):
            merge_platforms(mixed, mixed)
        result = merge_platforms(mixed, mixed, compiler_a="gcc", compiler_b="clang")
        assert len(result.records) == 4
        with pytest.raises(ConfigurationError):
            merge_platforms(mixed, mixed, compiler_a="icc", compiler_b="clang")

    def test_version_and_precision_checks(self):
        """Test that schema and precision mismatches are refused."""
        metadata = _with_runs(_metadata())
        with pytest.raises(SchemaVersionError):
            merge_platforms(metadata, metadata.model_copy(update={"schema_version": 2}))
        fp32 = _with_runs(_metadata(_config(precision=Precision.FP32)))
        with pytest.raises(ConfigurationError):
            merge_platforms(metadata, fp32)

    def test_relative_epsilon(self):
        """Test that a relative epsilon absorbs close values."""
        metadata = _metadata()
        key = (metadata.tests[0].test_id, 0, OptLevel.O0)
        side_a = _with_runs(metadata, outcome="0x1p+0")
        side_b = _with_runs(metadata, outcome="0x1p+0", overrides={key: ("0x1.0000000000001p+0", RunStatus.OK)})
        assert sum(r.discrepancy.is_discrepancy for r in merge_platforms(side_a, side_b).records) == 1
        relaxed = merge_platforms(side_a, side_b, relative_epsilon=1e-12)
        assert not any(r.discrepancy.is_discrepancy for r in relaxed.records)

    def test_document_round_trip(self):
        """Test that a merge document reloads to the same records."""
        metadata = _metadata()
        key = (metadata.tests[0].test_id, 1, OptLevel.O0)
        side_a = _with_runs(metadata, overrides={key: ("-nan", RunStatus.OK)})
        side_b = _with_runs(metadata, overrides={(metadata.tests[1].test_id, 0, OptLevel.O0): (None, RunStatus.TIMEOUT)})
        result = merge_platforms(side_a, side_b)
        restored = merge_from_document(merge_to_document(result))
        assert [(r.test_id, r.input_index, r.discrepancy) for r in restored.records] == [
            (r.test_id, r.input_index, r.discrepancy) for r in result.records
        ]
        assert restored.unavailable == result.unavailable
        assert restored.runs_attempted == result.runs_attempted

    def test_parse_cross_level(self):
        """Test parsing a pair of levels."""
        assert parse_cross_level("O0:O3_FM") == (OptLevel.O0, OptLevel.O3_FM)
        assert parse_cross_level(None) is None
        for text in ("O0", "O0:O9", "O0:O1:O2"):
            with pytest.raises(ConfigurationError):
                parse_cross_level(text)


class TestShards:
    """Concatenation of batch shards."""

    def test_concat(self):
        """Test that shards concatenate into the whole batch."""
        whole = _with_runs(_metadata(_config(num_programs=4)))
        head = _with_runs(_metadata(_config(num_programs=2)))
        tail = _with_runs(_metadata(_config(num_programs=2, start_index=2)))
        merged = concat_shards([tail, head, head])
        assert sorted(t.test_id for t in merged.tests) == sorted(t.test_id for t in whole.tests)
        assert len(merged.runs) == len(whole.runs)

    def test_schema_mismatch(self):
        """Test that shards of different schemas are refused."""
        metadata = _metadata()
        with pytest.raises(SchemaVersionError):
            concat_shards([metadata, metadata.model_copy(update={"schema_version": 2})])

    def test_conflicting_tests(self):
        """Test that a test id with different content is refused."""
        metadata = _metadata()
        entry = metadata.tests[0].model_copy(update={"inputs": [["+1.0000E0"]]})
        with pytest.raises(ConfigurationError):
            concat_shards([metadata, metadata.model_copy(update={"tests": [entry]})])

    def test_no_shards(self):
        """Test that concatenating nothing raises."""
        with pytest.raises(ConfigurationError):
            concat_shards([])


@requires_host_cc
class TestCampaignService:
    """End-to-end batches on the host C compiler."""

    @pytest.mark.asyncio
    async def test_run_campaign(self, host_cc_spec, work_dir, tmp_path):
        """Test a whole campaign with the host compiler."""
        harness = Harness(work_dir, jobs=4)
        service = CampaignService(harness, [host_cc_spec], JsonMetadataRepository())
        out_path = tmp_path / "metadata.json"
        metadata = await service.run_campaign(_config(), out_path)
        assert len(metadata.runs) == 4
        assert metadata.failed_runs == 0
        assert harness.compile_count == 2
        assert host_cc_spec.id in metadata.platform.compiler_versions
        saved = await JsonMetadataRepository().load(out_path)
        assert dump_model(saved) == dump_model(metadata)
        assert all(r.discrepancy.tag is DiscrepancyTag.CONSISTENT for r in merge_platforms(saved, saved).records)

    @pytest.mark.asyncio
    async def test_o0_agrees_with_reference(self, host_cc_spec, work_dir):
        """Test that O0 without contraction matches the reference interpreter."""
        spec = host_cc_spec.model_copy(update={"extra_args": ["-ffp-contract=off"]})
        config = _config(num_programs=200, count=2, generation={"math_fn_set": [], "math_probability": 0.0})
        service = CampaignService(Harness(work_dir, jobs=4), [spec], JsonMetadataRepository())
        metadata = await service.execute(build_metadata(config, prepare_tests(config)))
        tests = {t.test_id: t for t in restore_tests(metadata)}
        for run in metadata.runs:
            assert run.status is RunStatus.OK
            test = tests[run.test_id]
            _, expected = interpret(test.ast, test.inputs[run.input_index])
            observed = parse_outcome(run.outcome, Precision.FP64)
            assert compare_outcomes(expected, observed).tag is DiscrepancyTag.CONSISTENT, run.test_id
