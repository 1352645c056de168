"""
Tests for diagonalization and spectrum scans.
"""

import numpy as np
import pytest

from qaent.exceptions import ValidationError
from qaent.model import assemble_hamiltonian, build_instance, flat_schedule, preset
from qaent.spectra import eigendecompose, extract_gap, fix_phases, scan_vs_h, scan_vs_s


def pair_gap(energy_scale: float, delta: float) -> float:
    """Exact gap of the coupled pair: sqrt(a^2 + Delta^2) - a with a = E |J|."""
    a = 2.5 * energy_scale
    return float(np.hypot(a, delta) - a)


class TestEigendecompose:
    def test_pair_matches_closed_form(self, fm2, synthetic):
        s = 0.339
        delta, escale = synthetic.at(s)
        spec = eigendecompose(assemble_hamiltonian(fm2, synthetic, s))
        assert spec.energies[0] == pytest.approx(-np.hypot(2.5 * escale, delta), abs=1e-10)
        assert spec.gap == pytest.approx(pair_gap(escale, delta), abs=1e-10)

    def test_random_pairs_match_closed_form(self, rng):
        for _ in range(100):
            delta = rng.uniform(0.05, 5.0)
            escale = rng.uniform(0.05, 2.0)
            coupling = -rng.uniform(0.1, 3.0)
            pair = build_instance(2, couplings=[(0, 1, coupling)])
            spec = eigendecompose(assemble_hamiltonian(pair, flat_schedule(delta, escale), 0.5))
            a = abs(coupling) * escale
            assert spec.gap == pytest.approx(np.hypot(a, delta) - a, rel=1e-9, abs=1e-12)

    def test_energies_sum_to_trace(self, rng):
        instance = build_instance(
            4,
            h=rng.uniform(-0.5, 0.5, 4).tolist(),
            couplings=[(0, 1, -2.5), (1, 2, 1.2), (2, 3, -0.7), (0, 3, 0.4)],
        )
        operator = assemble_hamiltonian(instance, flat_schedule(1.7, 0.8), 0.5)
        spec = eigendecompose(operator)
        assert spec.energies.sum() == pytest.approx(np.trace(operator.matrix), abs=1e-9)

    def test_pair_spectrum_is_even_in_bias(self, fm2, synthetic):
        for h in (0.05, 0.1, 0.3):
            up = eigendecompose(assemble_hamiltonian(fm2, synthetic, 0.339, h)).energies
            down = eigendecompose(assemble_hamiltonian(fm2, synthetic, 0.339, -h)).energies
            assert np.allclose(up, down, atol=1e-12)

    def test_free_qubit(self, single_qubit):
        spec = eigendecompose(assemble_hamiltonian(single_qubit, flat_schedule(4.0, 1.0), 0.0))
        assert spec.energies.tolist() == pytest.approx([-2.0, 2.0])
        # ground state is |+>
        assert np.allclose(spec.state(0), [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_phase_convention(self):
        vectors = np.array([[0.6, -0.8], [-0.8, -0.6]]) * 1j
        fixed = fix_phases(vectors)
        pivots = fixed[np.argmax(np.abs(fixed), axis=0), [0, 1]]
        assert np.allclose(pivots.imag, 0)
        assert np.all(pivots.real > 0)

    def test_eigenvectors_are_orthonormal(self, fm4_spectrum):
        states = fm4_spectrum.states
        assert np.allclose(states.conj().T @ states, np.eye(16), atol=1e-12)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_gap_needs_two_levels(self):
        spec = eigendecompose(np.array([[1.0]]))
        with pytest.raises(ValidationError):
            extract_gap(spec)

    def test_ground_polarization_vanishes_at_zero_bias(self, fm2_spectrum):
        assert np.allclose(fm2_spectrum.polarization(0), 0.0, atol=1e-12)


class TestScans:
    def test_scan_vs_s_levels(self, fm2, synthetic):
        scan = scan_vs_s(fm2, synthetic, np.linspace(0.2, 0.5, 7))
        assert scan.levels.shape == (7, 4)
        assert np.all(scan.levels[:, 0] == 0.0)
        assert np.allclose(scan.levels[:, 1], scan.gap)
        assert scan.gap_monotonicity() == "decreasing"

    def test_avoided_crossing_at_zero_bias(self, fm2, synthetic):
        scan = scan_vs_h(fm2, synthetic, 0.339, np.linspace(-0.2, 0.2, 41))
        assert scan.min_gap_at == pytest.approx(0.0, abs=1e-12)
        assert scan.min_gap > 0
        # the two lowest levels carry opposite polarization away from h = 0
        assert scan.polarization[0, 0] < 0 < scan.polarization[-1, 0]

    def test_gap_closes_earlier_for_the_ring(self, synthetic):
        grid = np.linspace(0.2, 0.5, 61)
        pair = scan_vs_s(preset("fm2"), synthetic, grid)
        ring = scan_vs_s(preset("fm8"), synthetic, grid, workers=2)
        threshold = 0.4
        assert ring.first_below(threshold) < pair.first_below(threshold)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_chain_gap_shrinks_with_length(self, n):
        """In the ordered regime the gap falls roughly as Delta^n."""
        chain_short = preset(f"chain{n}")
        chain_long = preset(f"chain{n + 1}")
        for delta in (0.05, 0.1):
            schedule = flat_schedule(delta, 1.0)
            short = eigendecompose(assemble_hamiltonian(chain_short, schedule, 0.5)).gap
            long = eigendecompose(assemble_hamiltonian(chain_long, schedule, 0.5)).gap
            assert long < short

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_chain_gap_scaling_exponent(self, n):
        chain = preset(f"chain{n}")
        deltas = np.array([0.05, 0.1])
        gaps = [
            eigendecompose(assemble_hamiltonian(chain, flat_schedule(d, 1.0), 0.5)).gap
            for d in deltas
        ]
        slope = np.log(gaps[1] / gaps[0]) / np.log(deltas[1] / deltas[0])
        assert slope == pytest.approx(n, abs=0.1)

    def test_resolved_flags(self, fm2, synthetic):
        scan = scan_vs_s(fm2, synthetic, [0.2, 0.45])
        assert scan.resolved(0.4).tolist() == [True, False]

    def test_frame_columns(self, fm2, synthetic):
        frame = scan_vs_s(fm2, synthetic, [0.3, 0.35]).to_frame(max_levels=3)
        assert list(frame.columns) == ["axis_value", "E2-E1", "E3-E1", "gap"]

    def test_centred_levels(self, fm2, synthetic):
        scan = scan_vs_s(fm2, synthetic, [0.3])
        centred = scan.baseline_centred()
        assert centred[0, 0] == pytest.approx(-scan.gap[0] / 2)
        assert centred[0, 1] == pytest.approx(scan.gap[0] / 2)

    def test_workers_do_not_change_results(self, fm4, synthetic):
        grid = np.linspace(0.2, 0.4, 9)
        serial = scan_vs_s(fm4, synthetic, grid)
        threaded = scan_vs_s(fm4, synthetic, grid, workers=3)
        assert np.allclose(serial.gap, threaded.gap, rtol=0, atol=1e-12)

    def test_empty_grid_rejected(self, fm2, synthetic):
        with pytest.raises(ValidationError):
            scan_vs_s(fm2, synthetic, [])
