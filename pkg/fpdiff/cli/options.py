"""
Argument groups shared by several sub-commands.
"""
import argparse
from typing import List, Optional

from fpdiff.config import settings
from fpdiff.core.entities.execution import Dialect, OptLevel
from fpdiff.core.entities.precision import Precision
from fpdiff.core.services.campaign import make_campaign_config
from fpdiff.exceptions import ConfigurationError
from fpdiff.schemas.generation import make_gen_config, make_input_settings
from fpdiff.schemas.metadata import CampaignConfig

METADATA_FILE = "metadata.json"


def comma_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_levels(values: Optional[List[str]]) -> List[OptLevel]:
    names = values if values else settings.DEFAULT_LEVELS
    try:
        return [OptLevel(name) for name in names]
    except ValueError:
        raise ConfigurationError(
            f"Unknown optimization level in {names}", {"levels": [level.value for level in OptLevel]}
        ) from None


def parse_dialects(values: List[str]) -> List[Dialect]:
    by_name = {d.value.lower(): d for d in Dialect}
    by_name.update({"c": Dialect.PORTABLE_C, "portable_c": Dialect.PORTABLE_C})
    try:
        return [by_name[name.lower()] for name in values]
    except KeyError as e:
        raise ConfigurationError(f"Unknown dialect {e.args[0]!r}", {"dialects": list(by_name)}) from None


def add_generation_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("generation")
    group.add_argument("-n", "--num-programs", type=int, default=None, help="programs to generate (default 10)")
    group.add_argument("--seed", type=int, default=None, help="campaign seed (default 0)")
    group.add_argument("--start-index", type=int, default=0, help="index of the first program, for batches")
    group.add_argument("--precision", choices=[p.value for p in Precision], default=None)
    group.add_argument("--count-inputs", type=int, default=None, help="input vectors per program")
    group.add_argument("--input-seed", type=int, default=0)
    group.add_argument(
        "--dialects",
        type=comma_list,
        default=None,
        help="comma-separated dialects (default PortableC); with `run` on an existing batch, the ones to run",
    )
    group.add_argument("--max-loop-nesting", type=int, default=3)
    group.add_argument("--max-stmts", type=int, default=4, help="max statements per block")
    group.add_argument("--math-functions", type=comma_list, default=None, help="comma-separated math catalog subset")
    group.add_argument("--hipify", action="store_true", help="derive HIP sources from the CUDA emission")
    group.add_argument("--decimal-echo", action="store_true", help="also print comp as a decimal")


def generation_flags_given(args: argparse.Namespace) -> bool:
    return any(getattr(args, name) is not None for name in ("num_programs", "seed", "precision", "count_inputs"))


def campaign_config_from_args(args: argparse.Namespace, levels: Optional[List[OptLevel]] = None) -> CampaignConfig:
    gen_kwargs = {
        "precision": Precision(args.precision or Precision.FP64.value),
        "seed": args.seed or 0,
        "max_loop_nesting": args.max_loop_nesting,
        "max_stmts_per_block": args.max_stmts,
    }
    if args.math_functions is not None:
        gen_kwargs["math_fn_set"] = args.math_functions
        if not args.math_functions:
            gen_kwargs["math_probability"] = 0.0
    count = settings.INPUTS_PER_PROGRAM if args.count_inputs is None else args.count_inputs
    return make_campaign_config(
        generation=make_gen_config(**gen_kwargs),
        inputs=make_input_settings(count=count, seed=args.input_seed),
        num_programs=10 if args.num_programs is None else args.num_programs,
        dialects=parse_dialects(args.dialects or [Dialect.PORTABLE_C.value]),
        levels=levels or parse_levels(None),
        start_index=args.start_index,
        hipify=args.hipify,
        decimal_echo=args.decimal_echo,
    )
