"""
`report`: per-level tables, adjacency matrices and the summary line.
"""
import argparse
import asyncio
from pathlib import Path

from fpdiff.core.services.campaign import merge_from_document
from fpdiff.core.services.report import render_report_text, report_from_merge
from fpdiff.dependencies import get_metadata_repository
from fpdiff.middleware import log_command


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="summarize a merge result")
    parser.add_argument("comparisons", type=Path, help="output of `merge`")
    parser.add_argument("--format", choices=["text", "json"], default="text")
    parser.add_argument("--out", type=Path, default=None, help="write to a file instead of stdout")
    parser.set_defaults(handler=handle)


@log_command("report")
def handle(args: argparse.Namespace) -> int:
    document = asyncio.run(get_metadata_repository().load_merge(args.comparisons))
    report = report_from_merge(merge_from_document(document))
    if args.format == "json":
        text = report.model_dump_json(indent=2) + "\n"
    else:
        text = render_report_text(report)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0
