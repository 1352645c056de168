"""
Spectrum scans and simulated QTS maps.
"""

import logging

from qaent.qts import simulate_qts_map
from qaent.spectra import SpectrumScan, scan_vs_h, scan_vs_s

from ..models import SpectrumConfig, TableResult
from .base import BaseService

logger = logging.getLogger(__name__)


class SpectrumService(BaseService[SpectrumConfig]):
    """Eigen-spectrum along s or h, optionally with the matching QTS map."""

    def scan(self) -> SpectrumScan:
        cfg = self.config
        if cfg.axis == "s":
            return scan_vs_s(self.instance, self.schedule, cfg.s_grid, cfg.workers)
        assert cfg.s is not None
        return scan_vs_h(self.instance, self.schedule, cfg.s, cfg.h_grid, cfg.workers)

    def run(self) -> list[TableResult]:
        cfg = self.config
        scan = self.scan()
        linewidth = cfg.probe.linewidth

        frame = scan.to_frame(cfg.max_levels, cfg.centred)
        frame["resolved"] = scan.resolved(linewidth)
        for qubit in range(self.instance.n):
            frame[f"mz{qubit}"] = scan.polarization[:, qubit]

        first_unresolved = scan.first_below(linewidth)
        metadata = {
            **self.metadata(),
            "axis": cfg.axis,
            "fixed_s": "" if cfg.s is None else cfg.s,
            "linewidth_ghz": linewidth,
            "min_gap_ghz": scan.min_gap,
            "min_gap_at": scan.min_gap_at,
            "gap_trend": scan.gap_monotonicity(),
            "first_unresolved": "none" if first_unresolved is None else first_unresolved,
        }
        if first_unresolved is not None:
            logger.info(
                f"Gap drops below the {linewidth} GHz line width at "
                f"{cfg.axis}={first_unresolved:.4g}"
            )
        results = [TableResult(name="", frame=frame, metadata=metadata)]

        if cfg.qts:
            grid = cfg.s_grid if cfg.axis == "s" else cfg.h_grid
            qts_map = simulate_qts_map(
                self.instance,
                self.schedule,
                cfg.axis,
                grid,
                cfg.probe.to_probe(),
                fixed_s=cfg.s,
                workers=cfg.workers,
            )
            results.append(
                TableResult(
                    name="qts",
                    frame=qts_map.to_frame(),
                    metadata={
                        **self.metadata(),
                        "axis": cfg.axis,
                        "lineshape": cfg.probe.lineshape,
                        "linewidth_ghz": linewidth,
                        "probe_coupling_ghz": cfg.probe.j_p,
                    },
                )
            )
        return results
