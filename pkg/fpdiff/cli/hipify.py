"""
`hipify`: convert CUDA sources to HIP.
"""
import argparse
from pathlib import Path

import structlog

from fpdiff.config import settings
from fpdiff.core.services.emitter import hipify_lite
from fpdiff.exceptions import FPDiffError
from fpdiff.middleware import log_command

logger = structlog.get_logger()


def register(subparsers) -> None:
    parser = subparsers.add_parser("hipify", help="convert .cu files to .hip")
    parser.add_argument("sources", nargs="+", type=Path)
    parser.add_argument("--out-dir", type=Path, default=None, help="default: next to each source")
    parser.add_argument("--tool", default=None, help="external hipify executable")
    parser.set_defaults(handler=handle)


@log_command("hipify")
def handle(args: argparse.Namespace) -> int:
    tool = args.tool or settings.HIPIFY_PATH
    exit_code = 0
    for source in args.sources:
        try:
            hip_text = hipify_lite(source.read_text(encoding="utf-8"), tool)
        except OSError as e:
            logger.error("Cannot read source", path=str(source), error=str(e))
            exit_code = 1
            continue
        except FPDiffError as e:
            logger.error("Conversion failed", path=str(source), error=e.message)
            exit_code = max(exit_code, e.exit_code)
            continue
        out_dir = args.out_dir or source.parent
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / source.with_suffix(".hip").name
        target.write_text(hip_text, encoding="utf-8")
        print(target)
    return exit_code
