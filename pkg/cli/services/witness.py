"""
Partial-transpose witness bounds and their robustness.
"""

import logging

import numpy as np
import pandas as pd

from qaent.entangle import Bipartition, enumerate_bipartitions
from qaent.exceptions import DegenerateGroundStateError, UndefinedCutError
from qaent.witness import robustness_monte_carlo, susceptibility_witness, witness_report

from ..models import RobustnessConfig, TableResult, WitnessConfig, parse_partitions
from .base import BaseService

logger = logging.getLogger(__name__)


class WitnessService(BaseService[WitnessConfig]):
    """Per-cut SDP bounds along s with a per-s summary."""

    def cuts(self) -> list[Bipartition]:
        n = self.instance.n
        ids = parse_partitions(self.config.partitions, n)
        if ids is None:
            return enumerate_bipartitions(n)
        return [Bipartition.from_id(pid, n) for pid in ids]

    def r_values(self, s: float, parts: list[Bipartition]) -> dict[int, float] | None:
        if not self.instance.is_unbiased:
            return None
        try:
            _, r = susceptibility_witness(
                self.instance,
                self.schedule,
                s,
                self.temperature,
                parts,
                workers=self.config.workers,
            )
        except (DegenerateGroundStateError, UndefinedCutError) as e:
            logger.warning(f"No R_AB at s={s:.4g}: {e.message}")
            return None
        return r

    def run(self) -> list[TableResult]:
        cfg = self.config
        parts = self.cuts()
        reports = []
        summary = []
        robustness = []
        for index, s in enumerate(cfg.s_grid):
            spec, p1, p2 = self.equilibrium_point(s, cfg.population_error)
            report = witness_report(
                spec,
                p1,
                p2,
                parts,
                s=s,
                r_values=self.r_values(s, parts),
                bands=cfg.bands,
                workers=cfg.workers,
                tol=cfg.sdp_tolerance,
                max_iter=cfg.sdp_max_iter,
            )
            reports.append(report)
            bounds = report["bound"].to_numpy(dtype=float)
            finite = bounds[np.isfinite(bounds)]
            summary.append(
                {
                    "s": s,
                    "P1": p1.value,
                    "P2": p2.value,
                    "cuts": len(parts),
                    "certified_cuts": int(report["certified"].sum()),
                    "bound_min": float(finite.min()) if finite.size else np.nan,
                    "bound_median": float(np.median(finite)) if finite.size else np.nan,
                    "bound_max": float(finite.max()) if finite.size else np.nan,
                    "all_certified": bool(report["certified"].all()),
                }
            )
            if cfg.robustness_samples and finite.size:
                # weakest witness-bearing cut
                weakest = report.loc[report["bound"].idxmax(), "partition_id"]
                result = robustness_monte_carlo(
                    self.instance,
                    self.schedule,
                    s,
                    Bipartition.from_id(int(weakest), self.instance.n),
                    p1,
                    p2,
                    delta_scale=cfg.delta_error,
                    coupling_scale=cfg.escale_error,
                    samples=cfg.robustness_samples,
                    seed=np.random.SeedSequence([cfg.seed, index]),
                    workers=cfg.workers,
                )
                robustness.append(result.to_row())

        metadata = {
            **self.metadata(),
            "population_error": cfg.population_error,
            "cuts": len(parts),
            "sdp_tolerance": cfg.sdp_tolerance,
        }
        results = [
            TableResult(name="", frame=pd.DataFrame(summary), metadata=metadata),
            TableResult(name="cuts", frame=pd.concat(reports, ignore_index=True), metadata=metadata),
        ]
        if robustness:
            results.append(
                TableResult(
                    name="robustness",
                    frame=pd.DataFrame(robustness),
                    metadata={
                        **metadata,
                        "samples": cfg.robustness_samples,
                        "delta_error": cfg.delta_error,
                        "escale_error": cfg.escale_error,
                    },
                )
            )
        return results


class RobustnessService(BaseService[RobustnessConfig]):
    """Bound distribution over perturbed Hamiltonians per s and cut."""

    def cuts(self) -> list[Bipartition]:
        n = self.instance.n
        ids = parse_partitions(self.config.partitions, n)
        if ids is None:
            ids = [(1 << (n // 2)) - 1]
        return [Bipartition.from_id(pid, n) for pid in ids]

    def run(self) -> list[TableResult]:
        cfg = self.config
        parts = self.cuts()
        streams = iter(np.random.SeedSequence(cfg.seed).spawn(len(cfg.s_grid) * len(parts)))
        rows = []
        for s in cfg.s_grid:
            _, p1, p2 = self.equilibrium_point(s, cfg.population_error)
            for part in parts:
                summary = robustness_monte_carlo(
                    self.instance,
                    self.schedule,
                    s,
                    part,
                    p1,
                    p2,
                    delta_scale=cfg.delta_error,
                    coupling_scale=cfg.escale_error,
                    samples=cfg.samples,
                    seed=next(streams),
                    workers=cfg.workers,
                )
                logger.info(
                    f"Cut {part} at s={s:.4g}: {summary.certified_fraction:.1%} of "
                    f"{cfg.samples} perturbed Hamiltonians certified"
                )
                rows.append(summary.to_row())
        metadata = {
            **self.metadata(),
            "samples": cfg.samples,
            "population_error": cfg.population_error,
            "delta_error": cfg.delta_error,
            "escale_error": cfg.escale_error,
        }
        return [TableResult(name="", frame=pd.DataFrame(rows), metadata=metadata)]
