"""
Tests for simulated tunneling spectroscopy and population recovery.
"""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from qaent.exceptions import PopulationError, ProbeConstraintError, ValidationError
from qaent.model import ProbeConfig, assemble_hamiltonian, flat_schedule
from qaent.qts import (
    RateSpectrum,
    auto_eps_grid,
    estimate_populations,
    fit_gap,
    fit_peaks,
    gamma0,
    lineshape,
    simulate_population_protocol,
    simulate_qts_map,
    simulate_rate_spectrum,
)
from qaent.spectra import eigendecompose
from qaent.thermal import Temperature, boltzmann_populations


@pytest.fixture
def probe() -> ProbeConfig:
    return ProbeConfig(delta_p=0.001, j_p=-1.0, linewidth=0.1)


def synthetic_peaks(centers: list[float], width: float) -> RateSpectrum:
    grid = np.linspace(-2.0, 3.0, 1001)
    weights = np.ones(len(centers))
    raw = lineshape(grid[:, None] - np.array(centers)[None, :], width) @ weights
    return RateSpectrum(
        eps_p=grid,
        gamma_raw=raw,
        components=weights,
        centers=np.array(centers),
        gamma0=1.0,
        linewidth=width,
    )


class TestLineshape:
    @pytest.mark.parametrize("kind", ["gaussian", "lorentzian"])
    def test_unit_area(self, kind):
        x = np.linspace(-400, 400, 400001)
        assert trapezoid(lineshape(x, 0.4, kind), x) == pytest.approx(1.0, abs=2e-3)

    def test_gaussian_width_is_std(self):
        assert lineshape(np.array([0.0]), 0.5)[0] == pytest.approx(1 / (0.5 * np.sqrt(2 * np.pi)))

    def test_lorentzian_width_is_hwhm(self):
        values = lineshape(np.array([0.0, 0.3]), 0.3, "lorentzian")
        assert values[1] == pytest.approx(values[0] / 2)

    def test_rate_prefactor(self):
        assert gamma0(0.001) == pytest.approx(1.0)
        assert gamma0(0.002) == pytest.approx(4.0)


class TestRateSpectrum:
    def test_peaks_sit_on_resonances(self, fm2, flat, probe):
        spectrum = simulate_rate_spectrum(fm2, flat, 0.5, None, probe)
        fit = fit_peaks(spectrum, 2)
        assert not fit.unresolved
        assert fit.centroids[0] == pytest.approx(spectrum.centers[0], abs=2e-3)
        assert fit.centroids[1] == pytest.approx(spectrum.centers[1], abs=2e-3)

    def test_fitted_gap_matches_spectrum(self, fm2, flat, probe):
        spectrum = simulate_rate_spectrum(fm2, flat, 0.5, None, probe)
        exact = eigendecompose(assemble_hamiltonian(fm2, flat, 0.5)).gap
        fit = fit_gap(spectrum)
        assert fit.gap == pytest.approx(exact, abs=5e-3)
        assert fit.gap_error is not None and fit.gap_error < 5e-3

    def test_raw_rate_integrates_to_total_weight(self, fm2, flat, probe):
        grid = np.linspace(-20.0, 20.0, 40001)
        spectrum = simulate_rate_spectrum(fm2, flat, 0.5, None, probe, eps_grid=grid)
        area = trapezoid(spectrum.gamma_raw, spectrum.eps_p)
        assert area == pytest.approx(spectrum.gamma0 * spectrum.components.sum(), rel=1e-3)

    def test_wide_line_resolves_large_gap(self, fm2, flat):
        wide = ProbeConfig(delta_p=0.001, j_p=-1.0, linewidth=0.4)
        spectrum = simulate_rate_spectrum(fm2, flat, 0.5, None, wide)
        exact = eigendecompose(assemble_hamiltonian(fm2, flat, 0.5)).gap
        assert exact > 1.2
        fit = fit_gap(spectrum)
        assert not fit.unresolved
        assert fit.gap == pytest.approx(exact, rel=0.01)

    def test_wide_line_cannot_resolve_small_gap(self, fm2):
        schedule = flat_schedule(1.2, 1.0)
        wide = ProbeConfig(delta_p=0.001, j_p=-1.0, linewidth=0.4)
        spectrum = simulate_rate_spectrum(fm2, schedule, 0.5, None, wide)
        assert eigendecompose(assemble_hamiltonian(fm2, schedule, 0.5)).gap < 0.4
        assert fit_gap(spectrum).unresolved

    def test_weights_are_overlaps(self, fm2, flat, probe):
        spectrum = simulate_rate_spectrum(fm2, flat, 0.5, None, probe)
        assert spectrum.components.sum() == pytest.approx(1.0)
        assert np.max(spectrum.gamma) == pytest.approx(1.0)
        assert np.all(np.diff(spectrum.centers) >= 0)

    def test_explicit_grid(self, fm2, flat, probe):
        grid = np.linspace(-1.0, 1.0, 11)
        spectrum = simulate_rate_spectrum(fm2, flat, 0.5, None, probe, eps_grid=grid)
        assert np.array_equal(spectrum.eps_p, grid)

    def test_auto_grid_covers_lowest_resonances(self):
        grid = auto_eps_grid(np.array([0.0, 1.0, 2.0, 5.0, 9.0]), 0.1)
        assert grid[0] == pytest.approx(-0.4)
        assert grid[-1] == pytest.approx(5.4)
        assert np.max(np.diff(grid)) <= 0.01 + 1e-12

    def test_strong_probe_rejected(self, fm2, flat):
        strong = ProbeConfig(delta_p=0.05, j_p=-1.0)
        with pytest.raises(ProbeConstraintError):
            simulate_rate_spectrum(fm2, flat, 0.5, None, strong)

    def test_frame_columns(self, fm2, flat, probe):
        frame = simulate_rate_spectrum(fm2, flat, 0.5, None, probe).to_frame()
        assert list(frame.columns) == ["eps_p_ghz", "gamma_norm", "gamma_raw_per_us"]


class TestPeakFit:
    def test_close_peaks_are_unresolved(self):
        fit = fit_peaks(synthetic_peaks([0.0, 0.1], 0.4), 2)
        assert fit.unresolved

    def test_separated_peaks(self):
        fit = fit_peaks(synthetic_peaks([0.0, 1.5], 0.1), 2)
        assert fit.centroids == pytest.approx((0.0, 1.5), abs=1e-4)
        assert fit.widths == pytest.approx((0.1, 0.1), rel=1e-3)

    def test_coarse_grid_rejected(self):
        spectrum = synthetic_peaks([0.0, 1.5], 0.004)
        with pytest.raises(ValidationError):
            fit_peaks(spectrum, 2)

    def test_bad_count(self):
        with pytest.raises(ValidationError):
            fit_peaks(synthetic_peaks([0.0], 0.1), 0)


class TestQtsMap:
    def test_columns_normalized(self, fm2, flat, probe):
        qts_map = simulate_qts_map(fm2, flat, "h", [-0.2, 0.0, 0.2], probe, fixed_s=0.5)
        assert qts_map.gamma_norm.shape == (3, qts_map.eps_p.size)
        assert np.allclose(np.nanmax(qts_map.gamma_norm, axis=1), 1.0)

    def test_strong_probe_columns_are_nan(self, fm2, synthetic, probe):
        qts_map = simulate_qts_map(fm2, synthetic, "s", [0.3, 0.9], probe)
        assert np.all(np.isfinite(qts_map.gamma_norm[0]))
        assert np.all(np.isnan(qts_map.gamma_norm[1]))

    def test_h_axis_needs_fixed_s(self, fm2, flat, probe):
        with pytest.raises(ValidationError):
            simulate_qts_map(fm2, flat, "h", [0.0], probe)

    def test_frame_is_long_format(self, fm2, flat, probe):
        qts_map = simulate_qts_map(
            fm2, flat, "h", [0.0, 0.1], probe, fixed_s=0.5, eps_grid=[0.0, 1.0, 2.0]
        )
        frame = qts_map.to_frame()
        assert len(frame) == 6
        assert frame["axis_value"].tolist() == [0.0, 0.0, 0.0, 0.1, 0.1, 0.1]


class TestPopulations:
    def test_probability_to_population(self):
        estimate = estimate_populations([(0.0, 0.4), (1.0, 0.1)])
        assert estimate.p == pytest.approx((0.4 / 0.6, 0.1 / 0.9))
        assert estimate.pl_raw == (0.4, 0.1)

    def test_probe_never_tunneled(self):
        with pytest.raises(PopulationError):
            estimate_populations([(0.0, 1.0)])

    def test_probability_out_of_range(self):
        with pytest.raises(ValidationError):
            estimate_populations([(0.0, 1.2)])

    def test_overfull_populations(self):
        with pytest.raises(PopulationError):
            estimate_populations([(0.0, 0.5), (1.0, 0.4)])

    def test_protocol_recovers_boltzmann(self, fm2, synthetic, probe):
        T = Temperature(millikelvin=12.5)
        s = 0.36
        estimate = simulate_population_protocol(fm2, synthetic, s, T, probe, levels=2)
        spec = eigendecompose(assemble_hamiltonian(fm2, synthetic, s))
        expected = boltzmann_populations(spec, T)[:2]
        assert estimate.p == pytest.approx(tuple(expected), abs=1e-6)
        assert estimate.conservation_residual < 1e-12

    def test_ground_limit(self, fm2, flat, probe):
        estimate = simulate_population_protocol(fm2, flat, 0.5, None, probe, levels=2)
        assert estimate.p == pytest.approx((1.0, 0.0), abs=1e-12)
