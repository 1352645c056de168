"""
Single rate spectrum with its peak fit.
"""

import logging

from qaent.model import assemble_hamiltonian
from qaent.qts import fit_peaks, simulate_rate_spectrum
from qaent.spectra import eigendecompose

from ..models import QtsConfig, TableResult
from .base import BaseService

logger = logging.getLogger(__name__)


class QtsService(BaseService[QtsConfig]):
    """Simulated tunneling spectrum at one (s, h) point."""

    def run(self) -> list[TableResult]:
        cfg = self.config
        probe = cfg.probe.to_probe()
        spectrum = simulate_rate_spectrum(
            self.instance, self.schedule, cfg.s, cfg.h, probe, temperature=self.temperature
        )
        fit = fit_peaks(spectrum, cfg.peaks)
        exact_gap = eigendecompose(
            assemble_hamiltonian(self.instance, self.schedule, cfg.s, cfg.h)
        ).gap

        if fit.gap is not None:
            logger.info(
                f"Fitted gap {fit.gap:.4g} +/- {fit.gap_error:.2g} GHz "
                f"(exact {exact_gap:.4g} GHz)"
            )
        metadata = {
            **self.metadata(),
            "s": cfg.s,
            "h": "instance" if cfg.h is None else cfg.h,
            "lineshape": probe.lineshape,
            "linewidth_ghz": probe.linewidth,
            "gamma0_per_us": spectrum.gamma0,
            "centroids_ghz": " ".join(f"{c:.6g}" for c in fit.centroids),
            "centroid_errors_ghz": " ".join(f"{e:.3g}" for e in fit.centroid_errors),
            "fitted_gap_ghz": "nan" if fit.gap is None else fit.gap,
            "fitted_gap_error_ghz": "nan" if fit.gap_error is None else fit.gap_error,
            "exact_gap_ghz": exact_gap,
            "unresolved": fit.unresolved,
            "converged": fit.converged,
        }
        return [TableResult(name="", frame=spectrum.to_frame(), metadata=metadata)]
