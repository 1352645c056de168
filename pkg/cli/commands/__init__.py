"""
Subcommand handlers; each module registers its parsers on the CLI.
"""

from . import measures, populations, qts, spectrum, witness

__all__ = ["measures", "populations", "qts", "spectrum", "witness"]
