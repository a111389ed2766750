"""
`replay`: re-run one test input through the oracle and optionally one compiler.
"""
import argparse
import asyncio
from pathlib import Path
from typing import Optional

from fpdiff.cli.options import parse_levels
from fpdiff.core.entities.execution import ExecutionRecord, OptLevel
from fpdiff.core.services.campaign import restore_test
from fpdiff.core.services.classifier import compare_outcomes
from fpdiff.dependencies import get_harness, get_interpreter, get_metadata_repository, get_registry
from fpdiff.exceptions import ConfigurationError
from fpdiff.middleware import log_command


def register(subparsers) -> None:
    parser = subparsers.add_parser("replay", help="re-evaluate one test input")
    parser.add_argument("metadata", type=Path)
    parser.add_argument("--test-id", required=True)
    parser.add_argument("--input-index", type=int, default=0)
    parser.add_argument("--compiler", default=None, help="registry id of a compiler to run as well")
    parser.add_argument("--level", default="O0", choices=[level.value for level in OptLevel])
    parser.add_argument("--registry", default=None)
    parser.add_argument("--work-dir", default=None)
    parser.add_argument("--math-backend", choices=["libm", "numpy"], default=None)
    parser.add_argument("--widen", action="store_true", help="oracle with binary64 intermediates")
    parser.set_defaults(handler=handle)


async def _replay(args: argparse.Namespace) -> int:
    metadata = await get_metadata_repository().load(args.metadata)
    try:
        entry = metadata.program(args.test_id)
    except KeyError:
        raise ConfigurationError(f"Unknown test {args.test_id}") from None
    test = restore_test(entry)
    if not 0 <= args.input_index < len(test.inputs):
        raise ConfigurationError(f"Test {args.test_id} has {len(test.inputs)} inputs")
    vector = test.inputs[args.input_index]

    interpreter = get_interpreter(metadata.config.array_length, args.math_backend)
    _, oracle = interpreter.interpret(test.ast, vector, widen_intermediates=args.widen)
    print(f"inputs: {' '.join(vector.argv)}")
    print(f"oracle: {oracle.render()}")
    if args.compiler is None:
        return 0

    registry = get_registry(args.registry)
    spec = next((s for s in registry if s.id == args.compiler), None)
    if spec is None:
        raise ConfigurationError(f"Compiler {args.compiler} is not in the registry")
    bundle = next((b for d, b in test.bundles.items() if d.extension in spec.extensions), None)
    if bundle is None:
        raise ConfigurationError(
            f"Test {args.test_id} has no source for {spec.id}",
            {"dialects": [d.value for d in test.bundles]},
        )
    level = parse_levels([args.level])[0]
    harness = get_harness(args.work_dir, jobs=1)
    record: ExecutionRecord = await harness.compile_and_run(bundle, spec, level, vector, args.input_index)
    compiled: Optional[str] = record.outcome.render() if record.outcome is not None else None
    print(f"{spec.id} -{level.value}: {compiled or record.status.value}")
    if record.outcome is None:
        if record.diagnostics:
            print(record.diagnostics.rstrip())
        return 2
    print(f"class: {compare_outcomes(oracle, record.outcome).tag.value}")
    return 0


@log_command("replay")
def handle(args: argparse.Namespace) -> int:
    return asyncio.run(_replay(args))
