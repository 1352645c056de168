"""
``populations``: protocol against Boltzmann populations.
"""

import argparse
from pathlib import Path

from ..config import Settings
from ..models import PopulationsConfig
from ..services import PopulationService
from .common import add_probe_arguments, base_fields, execute, probe_options

NAME = "populations"


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="Level populations from the probe protocol and from Boltzmann",
    )
    parser.add_argument("--s-grid", help="Anneal fractions start:stop:num or a,b,c")
    parser.add_argument("--levels", type=int, default=2, help="Lowest levels to probe")
    add_probe_arguments(parser)
    parser.set_defaults(handler=run)


def build_config(args: argparse.Namespace, settings: Settings) -> PopulationsConfig:
    fields = base_fields(NAME, args, settings)
    if args.s_grid is not None:
        fields["s_grid"] = args.s_grid
    return PopulationsConfig(**fields, levels=args.levels, probe=probe_options(args, settings))


def run(args: argparse.Namespace, settings: Settings) -> list[Path]:
    return execute(PopulationService(build_config(args, settings)))
