"""
Input resolution shared by every service.
"""

import logging
from typing import Any, Generic, TypeVar

from qaent.model import (
    SYNTHETIC_LABEL,
    AnnealSchedule,
    ProblemInstance,
    assemble_hamiltonian,
    load_instance,
    load_schedule,
    preset,
    synthetic_schedule,
)
from qaent.spectra import Spectrum, eigendecompose
from qaent.thermal import Temperature, equilibrium_populations
from qaent.witness import Measured

from ..models import RunConfig, TableResult

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT", bound=RunConfig)


class BaseService(Generic[ConfigT]):
    """Loads the schedule and instance named by a run configuration."""

    def __init__(self, config: ConfigT):
        self.config = config
        if config.schedule is not None:
            self.schedule: AnnealSchedule = load_schedule(config.schedule)
        else:
            self.schedule = synthetic_schedule()
        if self.schedule.label == SYNTHETIC_LABEL:
            logger.warning(
                "Using the SYNTHETIC schedule; absolute GHz values are illustrative"
            )
        if config.instance is not None:
            self.instance: ProblemInstance = load_instance(config.instance)
        else:
            self.instance = preset(config.preset or "fm2")
        self.temperature = (
            None
            if config.temperature_mk is None
            else Temperature(millikelvin=config.temperature_mk)
        )

    def metadata(self) -> dict[str, Any]:
        """Header lines common to every table of the run."""
        return {
            "command": self.config.command,
            "instance": self.instance.name,
            "n_qubits": self.instance.n,
            "schedule": self.schedule.label or "unlabelled",
            "temperature_mk": (
                "0" if self.temperature is None else self.temperature.millikelvin
            ),
            "seed": self.config.seed,
        }

    def equilibrium_point(self, s: float, error: float) -> tuple[Spectrum, Measured, Measured]:
        """Spectrum at s with P1 and P2 of the equilibrium state, each with ``error``."""
        spec = eigendecompose(assemble_hamiltonian(self.instance, self.schedule, s))
        p = equilibrium_populations(spec, self.temperature)
        return spec, Measured(value=p[0], error=error), Measured(value=p[1], error=error)

    def run(self) -> list[TableResult]:
        raise NotImplementedError
