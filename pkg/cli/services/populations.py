"""
Population recovery from the simulated probe protocol.
"""

import logging

import numpy as np
import pandas as pd

from qaent.exceptions import ProbeConstraintError
from qaent.model import assemble_hamiltonian
from qaent.qts import simulate_population_protocol
from qaent.spectra import eigendecompose
from qaent.thermal import equilibrium_populations
from qaent.utils import parallel_map

from ..models import PopulationsConfig, TableResult
from .base import BaseService

logger = logging.getLogger(__name__)


class PopulationService(BaseService[PopulationsConfig]):
    """Protocol populations next to the Boltzmann values along s."""

    def point(self, s: float) -> dict[str, float]:
        cfg = self.config
        levels = cfg.levels
        spec = eigendecompose(assemble_hamiltonian(self.instance, self.schedule, s))
        expected = equilibrium_populations(spec, self.temperature)
        row: dict[str, float] = {"s": s}
        try:
            estimate = simulate_population_protocol(
                self.instance,
                self.schedule,
                s,
                self.temperature,
                cfg.probe.to_probe(),
                levels=levels,
            )
            recovered = np.asarray(estimate.p)
            residual = estimate.conservation_residual
        except ProbeConstraintError as e:
            logger.warning(f"No population estimate at s={s:.4g}: {e.message}")
            recovered = np.full(levels, np.nan)
            residual = float("nan")
        for k in range(levels):
            row[f"P{k + 1}"] = float(recovered[k])
        for k in range(levels):
            row[f"P{k + 1}_boltzmann"] = float(expected[k]) if k < expected.size else 0.0
        row["conservation_residual"] = residual
        return row

    def run(self) -> list[TableResult]:
        cfg = self.config
        rows = parallel_map(lambda s: self.point(float(s)), cfg.s_grid, cfg.workers)
        frame = pd.DataFrame(rows)
        deviation = 0.0
        for k in range(cfg.levels):
            diff = (frame[f"P{k + 1}"] - frame[f"P{k + 1}_boltzmann"]).abs()
            if diff.notna().any():
                deviation = max(deviation, float(diff.max()))
        logger.info(f"Protocol populations differ from Boltzmann by at most {deviation:.2e}")
        metadata = {
            **self.metadata(),
            "levels": cfg.levels,
            "max_deviation": deviation,
        }
        return [TableResult(name="", frame=frame, metadata=metadata)]
