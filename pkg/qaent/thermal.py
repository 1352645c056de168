"""
Boltzmann populations and energy-basis density matrices.
"""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import softmax

from .constants import (
    DENSITY_PSD_TOL,
    DENSITY_TRACE_TOL,
    HERMITICITY_TOL,
    KB_OVER_H_GHZ_PER_K,
    POPULATION_SUM_TOL,
)
from .exceptions import ValidationError
from .model import sigma_z_table
from .spectra import Spectrum
from .utils import hermiticity_error, hermitize

# energies closer than this to the ground energy count as degenerate at T = 0
_GROUND_DEGENERACY_GHZ = 1e-9


class Temperature(BaseModel):
    """Temperature in millikelvin; ``as_ghz`` gives k_B T / h."""

    model_config = ConfigDict(frozen=True)

    millikelvin: float = Field(..., gt=0, description="Temperature in mK")

    @property
    def as_ghz(self) -> float:
        return self.millikelvin * 1e-3 * KB_OVER_H_GHZ_PER_K


class DensityMatrix(BaseModel):
    """Hermitian, unit-trace, positive semidefinite operator."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @model_validator(mode="after")
    def _check_state(self) -> "DensityMatrix":
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got {m.shape}")
        if hermiticity_error(m) > HERMITICITY_TOL:
            raise ValidationError("density matrix is not Hermitian")
        trace = float(np.real(np.trace(m)))
        if abs(trace - 1.0) > DENSITY_TRACE_TOL:
            raise ValidationError(f"density matrix trace {trace} != 1")
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -DENSITY_PSD_TOL:
            raise ValidationError(f"density matrix has eigenvalue {min_eig:.3e} < 0")
        m.setflags(write=False)
        return self

    @classmethod
    def from_pure(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi)
        psi = psi / np.linalg.norm(psi)
        return cls(matrix=np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def boltzmann_populations(spec: Spectrum, T: Temperature) -> np.ndarray:
    """P_n = exp(-(E_n - E_1) / k_B T) / Z over the full spectrum."""
    return softmax(-(spec.energies - spec.energies[0]) / T.as_ghz)


def ground_state_populations(spec: Spectrum) -> np.ndarray:
    """T -> 0 limit: the ground manifold shares the population evenly."""
    ground = np.abs(spec.energies - spec.energies[0]) <= _GROUND_DEGENERACY_GHZ
    return ground / ground.sum()


def equilibrium_populations(spec: Spectrum, T: Temperature | None) -> np.ndarray:
    """Boltzmann populations, or the ground-state limit when ``T`` is None."""
    return ground_state_populations(spec) if T is None else boltzmann_populations(spec, T)


def build_density_matrix(
    spec: Spectrum,
    populations: Sequence[float] | np.ndarray,
    truncate: int | None = None,
) -> DensityMatrix:
    """
    rho = sum_n P_n |n><n| in the energy eigenbasis.

    Args:
        spec: Eigenstates to mix
        populations: P_n for the lowest levels
        truncate: Keep only the lowest ``truncate`` levels and renormalize

    Returns:
        Density matrix, diagonal in the energy basis

    Raises:
        ValidationError: Negative or over-full populations
    """
    p = np.asarray(populations, dtype=float).ravel()
    if p.size > spec.dim:
        raise ValidationError(f"{p.size} populations for {spec.dim} levels")
    if np.any(p < 0):
        raise ValidationError("populations must be >= 0", details={"p": p.tolist()})
    total = p.sum()
    if total > 1 + POPULATION_SUM_TOL:
        raise ValidationError(f"populations sum to {total} > 1")
    if truncate is not None:
        if truncate < 1:
            raise ValidationError(f"truncate must be >= 1, got {truncate}")
        p = p[:truncate]
        if p.sum() <= 0:
            raise ValidationError("truncated populations are all zero")
        p = p / p.sum()
    elif abs(total - 1) > POPULATION_SUM_TOL:
        raise ValidationError(
            f"populations sum to {total}; pass truncate to renormalize a subset"
        )
    vectors = spec.states[:, : p.size]
    rho = (vectors * p) @ vectors.conj().T
    return DensityMatrix(matrix=hermitize(rho))


def thermal_expectation_z(spec: Spectrum, T: Temperature | None) -> np.ndarray:
    """<sigma^z_i> of the equilibrium state for every qubit."""
    p = equilibrium_populations(spec, T)
    weights = (np.abs(spec.states) ** 2) @ p
    return weights @ sigma_z_table(spec.n_qubits)
