"""
Entanglement measures and the susceptibility witness along s.
"""

import logging

import numpy as np

from qaent.entangle import measure_series
from qaent.exceptions import DegenerateGroundStateError
from qaent.model import ProblemInstance
from qaent.witness import susceptibility_witness

from ..models import MeasuresConfig, TableResult
from .base import BaseService

logger = logging.getLogger(__name__)


class MeasuresService(BaseService[MeasuresConfig]):
    """C, N, E_f and W_chi of the equilibrium state along the anneal."""

    def witness_value(self, instance: ProblemInstance, s: float) -> float:
        """W_chi of one (possibly perturbed) instance; nan for a degenerate ground state."""
        try:
            value, _ = susceptibility_witness(instance, self.schedule, s, self.temperature)
        except DegenerateGroundStateError as e:
            logger.debug(f"No W_chi at s={s:.4g}: {e.message}")
            return float("nan")
        return value

    def run(self) -> list[TableResult]:
        cfg = self.config
        with_witness = cfg.witness and self.instance.is_unbiased and self.instance.n >= 2
        if cfg.witness and not with_witness:
            logger.warning("W_chi needs an unbiased instance of two or more qubits; column left as nan")
        series = measure_series(
            self.instance,
            self.schedule,
            self.temperature,
            cfg.s_grid,
            levels=cfg.levels,
            samples=cfg.samples,
            seed=cfg.seed,
            delta_error=cfg.delta_error,
            escale_error=cfg.escale_error,
            workers=cfg.workers,
            witness=self.witness_value if with_witness else None,
        )
        frame = series.to_frame()
        if cfg.witness:
            if with_witness:
                for s in frame.loc[frame["W_chi"].isna(), "s"]:
                    logger.warning(f"No W_chi at s={s:.4g}: ground state is degenerate")
            else:
                frame["W_chi"] = np.nan
                frame["Wchi_err"] = np.nan
            if self.instance.n == 2:
                frame["W_chi_minus_C"] = frame["W_chi"] - frame["C"]

        metadata = {
            **self.metadata(),
            "levels": cfg.levels,
            "samples": cfg.samples,
            "delta_error": cfg.delta_error,
            "escale_error": cfg.escale_error,
        }
        if cfg.witness and self.instance.n == 2:
            discrepancy = frame["W_chi_minus_C"].abs()
            if discrepancy.notna().any():
                metadata["max_wchi_discrepancy"] = float(discrepancy.max())
        return [TableResult(name="", frame=frame, metadata=metadata)]
