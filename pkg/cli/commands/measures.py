"""
``measures``: concurrence, negativity, E_f and W_chi along s.
"""

import argparse
from pathlib import Path

from ..config import Settings
from ..models import MeasuresConfig
from ..services import MeasuresService
from .common import add_error_arguments, base_fields, error_fields, execute

NAME = "measures"


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="Entanglement measures and the susceptibility witness along s",
    )
    parser.add_argument("--s-grid", help="Anneal fractions start:stop:num or a,b,c")
    parser.add_argument("--levels", type=int, default=2, help="Levels in the density matrix")
    parser.add_argument(
        "--samples", type=int, default=0, help="Monte-Carlo samples for error bands"
    )
    parser.add_argument(
        "--no-witness", action="store_true", help="Skip the susceptibility witness"
    )
    add_error_arguments(parser)
    parser.set_defaults(handler=run)


def build_config(args: argparse.Namespace, settings: Settings) -> MeasuresConfig:
    fields = base_fields(NAME, args, settings)
    if args.s_grid is not None:
        fields["s_grid"] = args.s_grid
    return MeasuresConfig(
        **fields,
        **error_fields(args, settings),
        levels=args.levels,
        samples=args.samples,
        witness=not args.no_witness,
    )


def run(args: argparse.Namespace, settings: Settings) -> list[Path]:
    return execute(MeasuresService(build_config(args, settings)))
