#!/usr/bin/env python3
"""
Desk-scale differential campaign: FP32 programs on one host compiler, O0 against O3_FM.
"""
import argparse
import asyncio
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from fpdiff.core.entities.execution import Dialect, OptLevel  # noqa: E402
from fpdiff.core.entities.precision import Precision  # noqa: E402
from fpdiff.core.services.campaign import make_campaign_config, merge_platforms  # noqa: E402
from fpdiff.core.services.report import render_report_text, report_from_merge  # noqa: E402
from fpdiff.dependencies import get_campaign_service  # noqa: E402
from fpdiff.infrastructure.storage.json_metadata_repository import dump_model  # noqa: E402
from fpdiff.middleware import configure_logging  # noqa: E402
from fpdiff.schemas.generation import make_gen_config, make_input_settings  # noqa: E402
from fpdiff.schemas.metadata import CampaignMetadata  # noqa: E402


async def desk_campaign(programs: int, inputs: int, seed: int, jobs: int, out_dir: Path) -> int:
    """Run the campaign, check its invariants and print the report."""
    print(f"Running {programs} FP32 programs x {inputs} inputs at O0 and O3_FM...")
    start_time = time.time()

    config = make_campaign_config(
        generation=make_gen_config(precision=Precision.FP32, seed=seed),
        inputs=make_input_settings(count=inputs, seed=seed),
        num_programs=programs,
        dialects=[Dialect.PORTABLE_C],
        levels=[OptLevel.O0, OptLevel.O3_FM],
    )
    service = get_campaign_service(work_dir=str(out_dir / "build"), jobs=jobs)
    metadata_path = out_dir / "metadata.json"
    metadata = await service.run_campaign(config, metadata_path)

    # Round trip
    text = metadata_path.read_text(encoding="utf-8")
    if dump_model(CampaignMetadata.model_validate_json(text)) != text:
        print("Metadata did not round-trip byte-stably")
        return 1

    result = merge_platforms(metadata, metadata, cross_level=(OptLevel.O0, OptLevel.O3_FM))
    report = report_from_merge(result)

    # Conservation
    for label, table in report.per_opt_table.items():
        if sum(table.counts.values()) != table.total:
            print(f"Class counts do not add up at {label}")
            return 1
    if report.summary.total_discrepancies != sum(r.discrepancy.is_discrepancy for r in result.records):
        print("Discrepancy total does not match the records")
        return 1

    print(render_report_text(report))
    print(f"Campaign completed in {time.time() - start_time:.1f}s")
    return 2 if metadata.failed_runs else 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--programs", type=int, default=1000)
    parser.add_argument("--inputs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--out-dir", type=Path, default=Path("desk-campaign"))
    args = parser.parse_args()

    configure_logging()
    sys.exit(asyncio.run(desk_campaign(args.programs, args.inputs, args.seed, args.jobs, args.out_dir)))
