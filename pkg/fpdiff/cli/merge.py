"""
`merge`: compare two platforms' metadata into comparison records.
"""
import argparse
import asyncio
from pathlib import Path

from fpdiff.core.services.campaign import concat_shards, merge_platforms, merge_to_document, parse_cross_level
from fpdiff.dependencies import get_metadata_repository, get_relative_epsilon
from fpdiff.middleware import log_command
from fpdiff.schemas.report import MergeDocument


def register(subparsers) -> None:
    parser = subparsers.add_parser("merge", help="join two platforms' runs and classify each pair")
    parser.add_argument("--a", nargs="+", type=Path, required=True, help="side a metadata (shards are concatenated)")
    parser.add_argument("--b", nargs="+", type=Path, required=True, help="side b metadata")
    parser.add_argument("--out", type=Path, default=Path("comparisons.json"))
    parser.add_argument("--compiler-a", default=None)
    parser.add_argument("--compiler-b", default=None)
    parser.add_argument("--cross-level", default=None, metavar="A:B", help="exploratory: side a at A vs side b at B")
    parser.set_defaults(handler=handle)


async def _merge(args: argparse.Namespace) -> MergeDocument:
    repository = get_metadata_repository()
    side_a = concat_shards([await repository.load(path) for path in args.a])
    side_b = concat_shards([await repository.load(path) for path in args.b])
    result = merge_platforms(
        side_a,
        side_b,
        cross_level=parse_cross_level(args.cross_level),
        compiler_a=args.compiler_a,
        compiler_b=args.compiler_b,
        relative_epsilon=get_relative_epsilon(),
    )
    document = merge_to_document(result)
    await repository.save_merge(document, args.out)
    return document


@log_command("merge")
def handle(args: argparse.Namespace) -> int:
    document = asyncio.run(_merge(args))
    discrepancies = sum(1 for r in document.records if r.discrepancy.value != "Consistent")
    print(
        f"{len(document.records)} comparisons ({discrepancies} discrepancies), "
        f"{len(document.unmatched_a) + len(document.unmatched_b)} unmatched, "
        f"{len(document.unavailable)} unavailable -> {args.out}"
    )
    return 0
