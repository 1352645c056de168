"""
Exact diagonalization and spectrum scans over s or a uniform bias h.
"""

from collections.abc import Sequence
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator
import scipy.linalg

from .constants import HERMITICITY_TOL
from .exceptions import ValidationError
from .model import (
    AnnealSchedule,
    HermitianOperator,
    ProblemInstance,
    assemble_hamiltonian,
    sigma_z_table,
)
from .utils import as_grid, hermiticity_error, logger, parallel_map


class Spectrum(BaseModel):
    """Ascending eigenvalues (GHz) with eigenvectors as matching columns."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    energies: np.ndarray
    states: np.ndarray

    @model_validator(mode="after")
    def _check_shapes(self) -> "Spectrum":
        if self.states.ndim != 2 or self.states.shape[1] != self.energies.shape[0]:
            raise ValidationError("eigenvector columns do not match eigenvalues")
        self.energies.setflags(write=False)
        self.states.setflags(write=False)
        return self

    @property
    def dim(self) -> int:
        return int(self.energies.shape[0])

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.states.shape[0])))

    @property
    def gap(self) -> float:
        return extract_gap(self)

    def state(self, k: int) -> np.ndarray:
        return self.states[:, k]

    def polarization(self, k: int = 0) -> np.ndarray:
        """<sigma^z_i> of eigenstate k for every qubit."""
        weights = np.abs(self.states[:, k]) ** 2
        return weights @ sigma_z_table(self.n_qubits)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive."""
    pivot_rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[pivot_rows, np.arange(vectors.shape[1])]
    return vectors * (pivots.conj() / np.abs(pivots))


def eigendecompose(H: HermitianOperator | np.ndarray) -> Spectrum:
    """
    Full dense eigendecomposition with a reproducible phase convention.

    Args:
        H: Hermitian operator or raw square matrix

    Returns:
        Spectrum in ascending order

    Raises:
        ValidationError: Input is not square or not Hermitian
    """
    matrix = H.matrix if isinstance(H, HermitianOperator) else np.asarray(H)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {matrix.shape}")
    err = hermiticity_error(matrix)
    if err > HERMITICITY_TOL:
        raise ValidationError(f"matrix is not Hermitian (max |H - H^+| = {err:.2e})")
    energies, states = scipy.linalg.eigh(matrix)
    return Spectrum(energies=energies, states=fix_phases(states))


def extract_gap(spec: Spectrum) -> float:
    """E_2 - E_1, clipped at zero."""
    if spec.dim < 2:
        raise ValidationError("gap needs at least two levels")
    return max(0.0, float(spec.energies[1] - spec.energies[0]))


class SpectrumScan(BaseModel):
    """Levels relative to the ground state along an s- or h-grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axis: Literal["s", "h"]
    grid: np.ndarray
    levels: np.ndarray
    gap: np.ndarray
    polarization: np.ndarray
    fixed_s: float | None = None

    @property
    def min_gap(self) -> float:
        return float(np.min(self.gap))

    @property
    def min_gap_at(self) -> float:
        return float(self.grid[int(np.argmin(self.gap))])

    def gap_monotonicity(self) -> str:
        """'decreasing', 'increasing' or 'non-monotone' (strict)."""
        steps = np.diff(self.gap)
        if np.all(steps < 0):
            return "decreasing"
        if np.all(steps > 0):
            return "increasing"
        return "non-monotone"

    def first_below(self, threshold: float) -> float | None:
        """First grid value where the gap drops below ``threshold``."""
        below = np.nonzero(self.gap < threshold)[0]
        return float(self.grid[below[0]]) if below.size else None

    def resolved(self, linewidth: float) -> np.ndarray:
        return self.gap >= linewidth

    def baseline_centred(self) -> np.ndarray:
        """Levels shifted so the two lowest sit at -g/2 and +g/2."""
        return self.levels - self.gap[:, None] / 2

    def to_frame(self, max_levels: int | None = None, centred: bool = False) -> pd.DataFrame:
        """Table with columns axis_value, E2-E1, E3-E1, ..., gap."""
        levels = self.baseline_centred() if centred else self.levels
        count = levels.shape[1] if max_levels is None else min(max_levels, levels.shape[1])
        frame = pd.DataFrame({"axis_value": self.grid})
        for k in range(1, count):
            frame[f"E{k + 1}-E1"] = levels[:, k]
        frame["gap"] = self.gap
        return frame


def _scan_point(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    h: float | None,
) -> tuple[np.ndarray, float, np.ndarray]:
    spec = eigendecompose(assemble_hamiltonian(instance, schedule, s, h))
    return spec.energies - spec.energies[0], extract_gap(spec), spec.polarization(0)


def _collect(
    axis: Literal["s", "h"],
    grid: np.ndarray,
    results: list[tuple[np.ndarray, float, np.ndarray]],
    fixed_s: float | None = None,
) -> SpectrumScan:
    levels = np.vstack([r[0] for r in results])
    levels[:, 0] = 0.0
    return SpectrumScan(
        axis=axis,
        grid=grid,
        levels=levels,
        gap=np.array([r[1] for r in results]),
        polarization=np.vstack([r[2] for r in results]),
        fixed_s=fixed_s,
    )


def scan_vs_s(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s_grid: Sequence[float] | np.ndarray,
    workers: int = 1,
) -> SpectrumScan:
    """
    Spectrum along the anneal at the instance's own biases.

    Args:
        instance: Problem instance
        schedule: Anneal schedule covering every grid point
        s_grid: Anneal fractions
        workers: Parallel grid workers

    Returns:
        Scan with levels, gap and ground-state polarization per s
    """
    grid = as_grid(s_grid)
    for s in (grid.min(), grid.max()):
        schedule.at(float(s))
    results = parallel_map(
        lambda s: _scan_point(instance, schedule, float(s), None), grid, workers
    )
    scan = _collect("s", grid, results)
    logger.info(
        f"Scanned {instance.name or 'instance'} over {grid.size} s points: "
        f"min gap {scan.min_gap:.4g} GHz at s={scan.min_gap_at:.4g}, "
        f"gap {scan.gap_monotonicity()}"
    )
    return scan


def scan_vs_h(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    h_grid: Sequence[float] | np.ndarray,
    workers: int = 1,
) -> SpectrumScan:
    """Spectrum against a uniform bias h applied to every qubit at fixed s."""
    grid = as_grid(h_grid)
    schedule.at(s)
    results = parallel_map(
        lambda h: _scan_point(instance, schedule, s, float(h)), grid, workers
    )
    scan = _collect("h", grid, results, fixed_s=s)
    logger.info(
        f"Scanned {instance.name or 'instance'} over {grid.size} h points at s={s}: "
        f"min gap {scan.min_gap:.4g} GHz at h={scan.min_gap_at:.4g}"
    )
    return scan
