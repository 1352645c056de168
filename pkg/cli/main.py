"""
Command-line entry point.
"""

import argparse
from collections.abc import Sequence
import logging
import sys

import pydantic

from qaent.exceptions import QaentError

from . import __version__
from .commands import measures, populations, qts, spectrum, witness
from .commands.common import common_parser
from .config import get_settings

logger = logging.getLogger(__name__)

VALIDATION_EXIT_CODE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaent",
        description="Spectra, spectroscopy and entanglement certification for "
        "small transverse-field Ising annealers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    parents = [common_parser()]
    for module in (spectrum, qts, populations, measures, witness):
        module.register(subparsers, parents)
    return parser


def configure_logging(level: str, verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO, format="[%(levelname)s] %(asctime)s - %(name)s - %(message)s"
    )
    resolved = logging.DEBUG if verbose else getattr(logging, level.upper(), logging.INFO)
    logging.getLogger().setLevel(resolved)
    logging.getLogger("qaent").setLevel(resolved)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Parse arguments, run one subcommand and return its exit code.

    Returns:
        0 on success, 2 on validation errors, 3 on numerical failures,
        1 on anything unexpected
    """
    args = build_parser().parse_args(argv)

    try:
        settings = get_settings()
        configure_logging(settings.log_level, args.verbose)
        logger.info(f"Running {args.command}")
        written = args.handler(args, settings)
    except QaentError as exc:
        logger.error(f"{exc.error_code}: {exc.message}")
        if exc.details:
            logger.debug(f"Details: {exc.details}")
        return exc.exit_code
    except pydantic.ValidationError as exc:
        for error in exc.errors():
            location = ".".join(str(part) for part in error["loc"]) or "config"
            logger.error(f"validation_error: {location}: {error['msg']}")
        return VALIDATION_EXIT_CODE
    except Exception as exc:
        logger.error(f"Unexpected error: {exc!s}", exc_info=True)
        return 1

    logger.info(f"{args.command} finished: {', '.join(str(p) for p in written)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
