"""
Sweep orchestration behind the subcommands.
"""

from .measures import MeasuresService
from .populations import PopulationService
from .qts import QtsService
from .spectrum import SpectrumService
from .witness import RobustnessService, WitnessService

__all__ = [
    "MeasuresService",
    "PopulationService",
    "QtsService",
    "RobustnessService",
    "SpectrumService",
    "WitnessService",
]
