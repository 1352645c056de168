"""
``qts``: one simulated rate spectrum and its peak fit.
"""

import argparse
from pathlib import Path

from ..config import Settings
from ..models import QtsConfig
from ..services import QtsService
from .common import add_probe_arguments, base_fields, execute, probe_options

NAME = "qts"


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="Simulated tunneling spectrum at one point",
        description="Probe tunneling rate against probe bias with a multi-Gaussian "
        "peak fit; centroids and the fitted gap go into the table header.",
    )
    parser.add_argument("--s", type=float, required=True, help="Anneal fraction")
    parser.add_argument("--h", type=float, help="Uniform bias (default: instance biases)")
    parser.add_argument("--peaks", type=int, default=2, help="Peaks to fit")
    add_probe_arguments(parser)
    parser.set_defaults(handler=run)


def build_config(args: argparse.Namespace, settings: Settings) -> QtsConfig:
    return QtsConfig(
        **base_fields(NAME, args, settings),
        s=args.s,
        h=args.h,
        peaks=args.peaks,
        probe=probe_options(args, settings),
    )


def run(args: argparse.Namespace, settings: Settings) -> list[Path]:
    return execute(QtsService(build_config(args, settings)))
