"""
`run`: execute a generated directory against the compiler registry.
"""
import argparse
import asyncio
from pathlib import Path
from typing import Optional

import structlog

from fpdiff.cli.options import (
    METADATA_FILE,
    add_generation_arguments,
    campaign_config_from_args,
    comma_list,
    generation_flags_given,
    parse_dialects,
    parse_levels,
)
from fpdiff.core.services.campaign import build_metadata, prepare_tests, write_sources
from fpdiff.dependencies import get_campaign_service
from fpdiff.middleware import log_command
from fpdiff.schemas.metadata import CampaignMetadata

logger = structlog.get_logger()


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "run",
        help="run a test directory (generating it first if it holds no batch)",
    )
    parser.add_argument("directory", type=Path)
    parser.add_argument("--levels", type=comma_list, default=None, help="comma-separated levels, e.g. O0,O3_FM")
    parser.add_argument("--compilers", type=comma_list, default=None, help="registry ids to run (default: first match)")
    parser.add_argument("--registry", default=None, help="compiler registry JSON file")
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--timeout", type=float, default=None, help="seconds per run")
    parser.add_argument("--work-dir", default=None, help="directory for binaries")
    parser.add_argument("--out", type=Path, default=None, help="metadata output (default DIR/metadata.json)")
    add_generation_arguments(parser)
    parser.set_defaults(handler=handle)


async def _run(args: argparse.Namespace) -> CampaignMetadata:
    levels = parse_levels(args.levels)
    service = get_campaign_service(
        registry_path=args.registry,
        work_dir=args.work_dir or str(args.directory / "build"),
        jobs=args.jobs,
        timeout=args.timeout,
    )
    batch_path = args.directory / METADATA_FILE
    out_path: Path = args.out or batch_path

    batch: Optional[CampaignMetadata] = None
    if await service.repository.exists(batch_path):
        batch = await service.repository.load(batch_path)
        if generation_flags_given(args):
            logger.warning("Directory already holds a batch; generation flags ignored", path=str(batch_path))
    if batch is None:
        config = campaign_config_from_args(args, levels)
        tests = prepare_tests(config, service.hipify_path)
        write_sources(tests, args.directory)
        batch = build_metadata(config, tests, source_dir=args.directory)

    dialects = parse_dialects(args.dialects) if args.dialects else None
    metadata = await service.execute(batch, levels, args.compilers, dialects)
    await service.repository.save(metadata, out_path)
    return metadata


@log_command("run")
def handle(args: argparse.Namespace) -> int:
    metadata = asyncio.run(_run(args))
    failed = metadata.failed_runs
    print(f"{len(metadata.runs)} runs recorded, {failed} failed")
    if metadata.skipped_dialects:
        print(f"Skipped dialects: {', '.join(d.value for d in metadata.skipped_dialects)}")
    return 2 if failed else 0
