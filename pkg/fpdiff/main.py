"""
Command-line entry point.
"""
import argparse
import sys
from typing import List, Optional

import structlog

from fpdiff.cli import generate, hipify, merge, replay, report, run
from fpdiff.config import settings
from fpdiff.exceptions import FPDiffError
from fpdiff.middleware import configure_logging

logger = structlog.get_logger()


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""

    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Differential floating-point testing across compilers and optimization levels",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    parser.add_argument("--log-level", default=None, help="override LOG_LEVEL")

    # Include sub-commands
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (generate, run, hipify, merge, report, replay):
        command.register(subparsers)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    config = settings
    if args.log_level:
        config = settings.model_copy(update={"LOG_LEVEL": args.log_level})
    configure_logging(config)

    try:
        return args.handler(args)
    except FPDiffError as e:
        logger.error(e.message, command=args.command, exit_code=e.exit_code, **e.details)
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrupted", command=args.command)
        return 130


if __name__ == "__main__":
    sys.exit(main())
