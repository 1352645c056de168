"""
Tests for Boltzmann populations and density matrices.
"""

import numpy as np
import pydantic
import pytest

from qaent.exceptions import ValidationError
from qaent.model import assemble_hamiltonian, build_instance, flat_schedule
from qaent.spectra import eigendecompose
from qaent.thermal import (
    DensityMatrix,
    Temperature,
    boltzmann_populations,
    build_density_matrix,
    equilibrium_populations,
    ground_state_populations,
    thermal_expectation_z,
)


class TestTemperature:
    def test_conversion(self):
        assert Temperature(millikelvin=12.5).as_ghz == pytest.approx(0.2604575)

    def test_non_positive_rejected(self):
        with pytest.raises(pydantic.ValidationError):
            Temperature(millikelvin=0.0)


class TestPopulations:
    def test_boltzmann_ratio(self, fm2_spectrum):
        T = Temperature(millikelvin=20.0)
        p = boltzmann_populations(fm2_spectrum, T)
        assert p.sum() == pytest.approx(1.0)
        assert p[1] / p[0] == pytest.approx(np.exp(-fm2_spectrum.gap / T.as_ghz))
        assert np.all(np.diff(p) <= 0)

    def test_hotter_excites_more(self, fm2, synthetic):
        cold, hot = Temperature(millikelvin=12.5), Temperature(millikelvin=25.0)
        for s in np.linspace(0.3, 0.45, 7):
            spec = eigendecompose(assemble_hamiltonian(fm2, synthetic, float(s)))
            assert boltzmann_populations(spec, hot)[1] > boltzmann_populations(spec, cold)[1]

    def test_ground_limit(self, fm2_spectrum):
        p = equilibrium_populations(fm2_spectrum, None)
        assert p[0] == 1.0
        assert p[1:].sum() == 0.0

    def test_degenerate_ground_shares_population(self):
        free_pair = build_instance(2, couplings=[(0, 1, -1.0)])
        spec = eigendecompose(assemble_hamiltonian(free_pair, flat_schedule(0.0, 1.0), 0.5))
        p = ground_state_populations(spec)
        assert p[:2] == pytest.approx([0.5, 0.5])


class TestDensityMatrix:
    def test_truncation_renormalizes(self, fm2_spectrum):
        rho = build_density_matrix(fm2_spectrum, [0.6, 0.2], truncate=2)
        assert np.trace(rho.matrix).real == pytest.approx(1.0)
        weights = np.real(np.diag(fm2_spectrum.states.conj().T @ rho.matrix @ fm2_spectrum.states))
        assert weights[:2] == pytest.approx([0.75, 0.25])

    @pytest.mark.parametrize("millikelvin", [5.0, 12.5, 40.0, 200.0])
    def test_eigenvalues_are_populations(self, fm4_spectrum, millikelvin):
        p = boltzmann_populations(fm4_spectrum, Temperature(millikelvin=millikelvin))
        rho = build_density_matrix(fm4_spectrum, p)
        eigenvalues = np.linalg.eigvalsh(rho.matrix)
        assert np.allclose(np.sort(eigenvalues), np.sort(p), atol=1e-12)

    def test_pure_state(self, fm2_spectrum):
        rho = build_density_matrix(fm2_spectrum, [1.0])
        assert rho.purity() == pytest.approx(1.0)
        assert rho.n_qubits == 2

    def test_partial_populations_need_truncate(self, fm2_spectrum):
        with pytest.raises(ValidationError):
            build_density_matrix(fm2_spectrum, [0.6, 0.2])

    def test_negative_population(self, fm2_spectrum):
        with pytest.raises(ValidationError):
            build_density_matrix(fm2_spectrum, [1.1, -0.1])

    def test_overfull_populations(self, fm2_spectrum):
        with pytest.raises(ValidationError):
            build_density_matrix(fm2_spectrum, [0.8, 0.4], truncate=2)

    def test_invalid_trace(self):
        with pytest.raises(ValidationError):
            DensityMatrix(matrix=np.eye(2))

    def test_from_pure_normalizes(self):
        rho = DensityMatrix.from_pure(np.array([1.0, 1.0, 0.0, 0.0]))
        assert rho.matrix[0, 1] == pytest.approx(0.5)


class TestExpectation:
    def test_zero_bias_has_no_polarization(self, fm2_spectrum):
        z = thermal_expectation_z(fm2_spectrum, Temperature(millikelvin=12.5))
        assert np.allclose(z, 0.0, atol=1e-12)

    def test_bias_polarizes_up(self, flat):
        biased = build_instance(2, h=[0.2, 0.2], couplings=[(0, 1, -2.5)])
        spec = eigendecompose(assemble_hamiltonian(biased, flat, 0.5))
        z = thermal_expectation_z(spec, None)
        assert np.all(z > 0)
        assert z[0] == pytest.approx(z[1])
