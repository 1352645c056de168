"""
``spectrum``: eigen-spectrum along s or h.
"""

import argparse
from pathlib import Path

from ..config import Settings
from ..models import SpectrumConfig
from ..services import SpectrumService
from .common import add_probe_arguments, base_fields, execute, probe_options

NAME = "spectrum"


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="Spectrum scan along s or a uniform bias h",
        description="Levels relative to the ground state, gap, resolvability and "
        "ground-state polarization; --qts adds the simulated spectroscopy map.",
    )
    parser.add_argument("--axis", choices=["s", "h"], default="s")
    parser.add_argument("--s-grid", help="Anneal fractions start:stop:num or a,b,c")
    parser.add_argument("--s", type=float, help="Fixed s for --axis h")
    parser.add_argument("--h-grid", help="Uniform biases start:stop:num or a,b,c")
    parser.add_argument("--max-levels", type=int, help="Levels written per row")
    parser.add_argument("--centred", action="store_true", help="Centre the lowest pair on zero")
    parser.add_argument("--qts", action="store_true", help="Also write the QTS map table")
    add_probe_arguments(parser)
    parser.set_defaults(handler=run)


def build_config(args: argparse.Namespace, settings: Settings) -> SpectrumConfig:
    fields = base_fields(NAME, args, settings)
    for key in ("s_grid", "h_grid", "max_levels", "s"):
        value = getattr(args, key)
        if value is not None:
            fields[key] = value
    return SpectrumConfig(
        **fields,
        axis=args.axis,
        centred=args.centred,
        qts=args.qts,
        probe=probe_options(args, settings),
    )


def run(args: argparse.Namespace, settings: Settings) -> list[Path]:
    return execute(SpectrumService(build_config(args, settings)))
