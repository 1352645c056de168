"""
``witness-sdp`` and ``robustness``: population-constrained witness bounds.
"""

import argparse
from pathlib import Path

from ..config import Settings
from ..models import RobustnessConfig, WitnessConfig
from ..services import RobustnessService, WitnessService
from .common import add_error_arguments, base_fields, error_fields, execute, pick

WITNESS = "witness-sdp"
ROBUSTNESS = "robustness"


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--s-grid", help="Anneal fractions start:stop:num or a,b,c")
    parser.add_argument(
        "--partitions", help="Comma list of cut bitmasks (qubit i in A if bit i is set)"
    )
    parser.add_argument(
        "--population-error", type=float, help="One-sigma error on P1 and P2"
    )
    add_error_arguments(parser)


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    witness = subparsers.add_parser(
        WITNESS,
        parents=parents,
        help="SDP upper bounds on the witness expectation per cut",
        description="Worst-case <W_AB> over states matching the measured P1 and "
        "P2 within their errors; a negative bound certifies entanglement.",
    )
    _add_shared(witness)
    witness.add_argument("--bands", action="store_true", help="Report bound sensitivities")
    witness.add_argument(
        "--robustness-samples",
        type=int,
        default=0,
        help="Perturbed Hamiltonians for the weakest cut per s",
    )
    witness.add_argument("--sdp-tolerance", type=float, help="SDP stopping tolerance")
    witness.add_argument("--sdp-max-iter", type=int, help="SDP iteration cap")
    witness.set_defaults(handler=run_witness)

    robustness = subparsers.add_parser(
        ROBUSTNESS,
        parents=parents,
        help="Monte-Carlo robustness of the witness bound",
    )
    _add_shared(robustness)
    robustness.add_argument("--samples", type=int, help="Perturbed Hamiltonians per s and cut")
    robustness.set_defaults(handler=run_robustness)


def build_witness_config(args: argparse.Namespace, settings: Settings) -> WitnessConfig:
    fields = base_fields(WITNESS, args, settings)
    if args.s_grid is not None:
        fields["s_grid"] = args.s_grid
    return WitnessConfig(
        **fields,
        **error_fields(args, settings),
        population_error=pick(args.population_error, settings.population_error),
        partitions=args.partitions,
        bands=args.bands,
        robustness_samples=args.robustness_samples,
        sdp_tolerance=pick(args.sdp_tolerance, settings.sdp_tolerance),
        sdp_max_iter=pick(args.sdp_max_iter, settings.sdp_max_iter),
    )


def build_robustness_config(args: argparse.Namespace, settings: Settings) -> RobustnessConfig:
    fields = base_fields(ROBUSTNESS, args, settings)
    if args.s_grid is not None:
        fields["s_grid"] = args.s_grid
    return RobustnessConfig(
        **fields,
        **error_fields(args, settings),
        population_error=pick(args.population_error, settings.population_error),
        partitions=args.partitions,
        samples=pick(args.samples, settings.mc_samples),
    )


def run_witness(args: argparse.Namespace, settings: Settings) -> list[Path]:
    return execute(WitnessService(build_witness_config(args, settings)))


def run_robustness(args: argparse.Namespace, settings: Settings) -> list[Path]:
    return execute(RobustnessService(build_robustness_config(args, settings)))
