"""
Flags shared by several subcommands and the run/write step.
"""

import argparse
import logging
from pathlib import Path
from typing import Any

from ..config import Settings
from ..models import ProbeOptions
from ..output import write_results
from ..services.base import BaseService

logger = logging.getLogger(__name__)


def common_parser() -> argparse.ArgumentParser:
    """Parent parser with input, physics and output flags."""
    parser = argparse.ArgumentParser(add_help=False)
    inputs = parser.add_argument_group("inputs")
    inputs.add_argument("--schedule", type=Path, help="Schedule table (default: SYNTHETIC)")
    source = inputs.add_mutually_exclusive_group()
    source.add_argument("--preset", help="Preset instance: fm2, fm8, fmN, chainN")
    source.add_argument("--instance", type=Path, help="Instance JSON file")

    physics = parser.add_argument_group("physics")
    physics.add_argument("--temperature", type=float, help="Temperature in mK")
    physics.add_argument(
        "--zero-temperature",
        action="store_true",
        help="Use the ground state instead of the Boltzmann state",
    )

    output = parser.add_argument_group("output")
    output.add_argument("-o", "--output", type=Path, help="Main output table")
    output.add_argument("--format", choices=["csv", "json"], help="Table format")
    output.add_argument("--seed", type=int, help="Root seed")
    output.add_argument("--workers", type=int, help="Parallel workers")
    output.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return parser


def add_probe_arguments(parser: argparse.ArgumentParser) -> None:
    probe = parser.add_argument_group("probe")
    probe.add_argument("--probe-delta", type=float, help="Probe tunneling amplitude, GHz")
    probe.add_argument("--probe-coupling", type=float, help="Probe coupling J_P, GHz")
    probe.add_argument("--probe-ratio", type=float, help="Weak-probe ratio")
    probe.add_argument("--linewidth", type=float, help="Line width, GHz")
    probe.add_argument("--lineshape", choices=["gaussian", "lorentzian"], default="gaussian")
    probe.add_argument("--attach-to", type=int, default=0, help="System qubit under the probe")
    probe.add_argument("--eps-grid", help="Probe bias grid start:stop:num or a,b,c (GHz)")


def add_error_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta-error", type=float, help="Fractional Delta spread")
    parser.add_argument("--escale-error", type=float, help="Fractional coupling spread")


def pick(value: Any, default: Any) -> Any:
    """Flag value when given, otherwise the settings default."""
    return default if value is None else value


def base_fields(command: str, args: argparse.Namespace, settings: Settings) -> dict[str, Any]:
    """RunConfig fields from the common flags, falling back to settings."""
    fmt = pick(args.format, settings.output_format)
    return {
        "command": command,
        "schedule": args.schedule,
        "preset": args.preset,
        "instance": args.instance,
        "temperature_mk": (
            None if args.zero_temperature else pick(args.temperature, settings.temperature_mk)
        ),
        "output": pick(args.output, Path(f"{command}.{fmt}")),
        "format": fmt,
        "seed": pick(args.seed, settings.seed),
        "workers": pick(args.workers, settings.workers),
    }


def error_fields(args: argparse.Namespace, settings: Settings) -> dict[str, Any]:
    return {
        "delta_error": pick(args.delta_error, settings.delta_error),
        "escale_error": pick(args.escale_error, settings.escale_error),
    }


def probe_options(args: argparse.Namespace, settings: Settings) -> ProbeOptions:
    return ProbeOptions(
        delta_p=pick(args.probe_delta, settings.probe_delta_ghz),
        j_p=pick(args.probe_coupling, settings.probe_coupling_ghz),
        ratio=pick(args.probe_ratio, settings.probe_ratio),
        linewidth=pick(args.linewidth, settings.linewidth_ghz),
        lineshape=args.lineshape,
        attach_to=args.attach_to,
        eps_grid=args.eps_grid,
    )


def execute(service: BaseService) -> list[Path]:
    """Run a service and write its tables with manifests."""
    results = service.run()
    return write_results(
        results,
        service.config,
        instance_name=service.instance.name,
        schedule_label=service.schedule.label,
    )
