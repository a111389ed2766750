"""
`generate`: emit N tests and their inputs to a directory.
"""
import argparse
import asyncio
from pathlib import Path

import structlog

from fpdiff.cli.options import METADATA_FILE, add_generation_arguments, campaign_config_from_args
from fpdiff.config import settings
from fpdiff.core.services.campaign import build_metadata, prepare_tests, write_sources
from fpdiff.dependencies import get_metadata_repository
from fpdiff.middleware import log_command

logger = structlog.get_logger()


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="generate test programs, sources and inputs")
    parser.add_argument("out_dir", type=Path, help="output directory")
    add_generation_arguments(parser)
    parser.set_defaults(handler=handle)


@log_command("generate")
def handle(args: argparse.Namespace) -> int:
    config = campaign_config_from_args(args)
    tests = prepare_tests(config, settings.HIPIFY_PATH)
    write_sources(tests, args.out_dir)
    metadata = build_metadata(config, tests, source_dir=args.out_dir)
    path = asyncio.run(get_metadata_repository().save(metadata, args.out_dir / METADATA_FILE))
    print(f"{len(tests)} tests written to {args.out_dir} ({path.name})")
    return 0
