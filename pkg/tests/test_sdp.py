"""
Tests for the population-constrained expectation bound.
"""

import numpy as np
import pytest

from qaent.exceptions import ValidationError
from qaent.sdp import maximize_expectation


def basis(d: int, *indices: int) -> np.ndarray:
    return np.eye(d)[:, list(indices)]


class TestMaximizeExpectation:
    def test_unconstrained_is_largest_eigenvalue(self, rng):
        a = rng.standard_normal((6, 6))
        w = (a + a.T) / 2
        result = maximize_expectation(w, basis(6, 0), [0.0], [1.0])
        assert result.status == "optimal"
        assert result.upper_bound == pytest.approx(np.linalg.eigvalsh(w)[-1], abs=1e-6)

    def test_upper_population_bound(self):
        w = np.diag([3.0, 1.0, 0.0, 0.0])
        result = maximize_expectation(w, basis(4, 0), [0.0], [0.25])
        assert result.upper_bound == pytest.approx(1.5, abs=1e-6)
        assert result.dual_certificate["face"] == "full"

    def test_lower_population_bound(self):
        w = np.diag([0.0, 1.0, 0.5, 0.0])
        result = maximize_expectation(w, basis(4, 0), [0.6], [1.0])
        assert result.upper_bound == pytest.approx(0.4, abs=1e-6)

    def test_coherences_are_exploited(self):
        # <+|W|+> = 1 for W = sigma_x; pinning <0|X|0> = 1/2 still allows it
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        result = maximize_expectation(w, basis(2, 0), [0.5], [0.5])
        assert result.upper_bound == pytest.approx(1.0, abs=1e-6)

    def test_pinned_face(self):
        w = np.diag([-0.3, 2.0, 5.0])
        result = maximize_expectation(w, basis(3, 0, 1), [1.0, 0.0], [1.0, 0.0])
        assert result.dual_certificate["face"] == "pinned"
        assert result.upper_bound == pytest.approx(-0.3, abs=1e-6)
        assert result.certified

    def test_reduced_face(self):
        w = np.diag([5.0, 1.0, 0.0, 0.0])
        result = maximize_expectation(w, basis(4, 0), [0.0], [0.0])
        assert result.dual_certificate["face"] == "reduced"
        assert result.upper_bound == pytest.approx(1.0, abs=1e-6)

    def test_bound_is_never_below_primal(self, rng):
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        w = (a + a.conj().T) / 2
        q, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        result = maximize_expectation(w, q, [0.3, 0.1], [0.5, 0.3])
        assert result.upper_bound >= result.primal_value - 1e-6
        assert result.duality_gap == pytest.approx(
            result.upper_bound - result.primal_value
        )

    def test_wider_bars_never_tighten(self, rng):
        a = rng.standard_normal((8, 8))
        w = (a + a.T) / 2
        vectors = basis(8, 0, 1)
        bounds = [
            maximize_expectation(w, vectors, [0.6 - d, 0.2 - d], [0.6 + d, 0.2 + d]).upper_bound
            for d in (0.0, 0.02, 0.05, 0.1)
        ]
        assert np.all(np.diff(bounds) >= -1e-6)

    def test_early_stop_still_bounds(self, rng):
        a = rng.standard_normal((6, 6))
        w = (a + a.T) / 2
        result = maximize_expectation(w, basis(6, 0), [0.2], [0.6], max_iter=1)
        exact = maximize_expectation(w, basis(6, 0), [0.2], [0.6])
        assert result.upper_bound >= exact.upper_bound - 1e-6

    def test_bounds_are_clipped(self):
        w = np.diag([1.0, 0.0])
        result = maximize_expectation(w, basis(2, 0), [-0.5], [1.5])
        assert result.upper_bound == pytest.approx(1.0, abs=1e-6)


class TestInfeasible:
    def test_crossed_bounds(self):
        result = maximize_expectation(np.eye(3), basis(3, 0), [0.6], [0.4])
        assert result.status == "infeasible"
        assert result.dual_certificate["reason"] == "lower bound exceeds upper bound"
        assert not result.certified

    def test_lower_bounds_exceed_one(self):
        result = maximize_expectation(np.eye(3), basis(3, 0, 1), [0.7, 0.5], [0.8, 0.6])
        assert result.status == "infeasible"
        assert result.dual_certificate["sum_lower"] == pytest.approx(1.2)

    def test_complete_basis_below_one(self):
        result = maximize_expectation(np.eye(2), basis(2, 0, 1), [0.0, 0.0], [0.4, 0.4])
        assert result.status == "infeasible"


class TestValidation:
    def test_vectors_must_be_orthonormal(self):
        vectors = np.array([[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(ValidationError):
            maximize_expectation(np.eye(2), vectors, [0.0, 0.0], [1.0, 1.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            maximize_expectation(np.eye(3), basis(2, 0), [0.0], [1.0])

    def test_bound_count(self):
        with pytest.raises(ValidationError):
            maximize_expectation(np.eye(2), basis(2, 0), [0.0, 0.0], [1.0])


def random_hermitian(rng, d: int, complex_valued: bool) -> np.ndarray:
    a = rng.standard_normal((d, d))
    if complex_valued:
        a = a + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


class TestSchurReduction:
    @pytest.mark.parametrize("complex_valued", [False, True])
    @pytest.mark.parametrize(
        "lower, upper",
        [([0.2], [0.6]), ([0.3, 0.1], [0.5, 0.3]), ([0.0, 0.05], [0.9, 0.15])],
    )
    def test_matches_dense_solver(self, rng, complex_valued, lower, upper):
        w = random_hermitian(rng, 12, complex_valued)
        q, _ = np.linalg.qr(rng.standard_normal((12, len(lower))))
        dense = maximize_expectation(w, q, lower, upper, method="cvxpy")
        reduced = maximize_expectation(w, q, lower, upper, method="schur")
        assert reduced.dual_certificate["method"] == "schur"
        assert dense.dual_certificate["method"] == "cvxpy"
        assert reduced.upper_bound == pytest.approx(dense.upper_bound, abs=1e-6)

    def test_reduced_face(self):
        w = np.diag([5.0, 1.0, 0.0, 0.0])
        result = maximize_expectation(w, basis(4, 0, 1), [0.0, 0.2], [0.0, 0.4], method="schur")
        assert result.dual_certificate["face"] == "reduced"
        assert result.upper_bound == pytest.approx(0.4, abs=1e-6)

    def test_optimal_without_primal_point(self, rng):
        w = random_hermitian(rng, 10, False)
        result = maximize_expectation(w, basis(10, 0, 1), [0.5, 0.1], [0.7, 0.3], method="schur")
        assert result.status == "optimal"
        assert np.isnan(result.primal_value)
        assert abs(result.dual_certificate["projection_shift"]) <= 1e-6
        assert result.dual_certificate["min_slack_eigenvalue"] >= 0

    def test_early_stop_reports_max_iter_and_still_bounds(self, rng):
        w = random_hermitian(rng, 10, True)
        vectors = basis(10, 0, 1)
        stopped = maximize_expectation(
            w, vectors, [0.5, 0.1], [0.7, 0.3], max_iter=1, method="schur"
        )
        exact = maximize_expectation(w, vectors, [0.5, 0.1], [0.7, 0.3], method="schur")
        assert stopped.status == "max-iter"
        assert stopped.upper_bound >= exact.upper_bound - 1e-6
        assert stopped.dual_certificate["min_slack_eigenvalue"] >= 0

    def test_auto_switches_above_dense_limit(self, rng):
        w = random_hermitian(rng, 80, False)
        result = maximize_expectation(w, basis(80, 0), [0.4], [0.6])
        assert result.dual_certificate["method"] == "schur"
        assert result.status == "optimal"

    def test_auto_stays_dense_for_small_operators(self, rng):
        w = random_hermitian(rng, 6, False)
        result = maximize_expectation(w, basis(6, 0), [0.4], [0.6])
        assert result.dual_certificate["method"] == "cvxpy"

    def test_pinned_face_rejected(self):
        w = np.diag([-0.3, 2.0, 5.0])
        with pytest.raises(ValidationError):
            maximize_expectation(w, basis(3, 0, 1), [1.0, 0.0], [1.0, 0.0], method="schur")

    def test_three_vectors_rejected(self, rng):
        w = random_hermitian(rng, 6, False)
        with pytest.raises(ValidationError):
            maximize_expectation(
                w, basis(6, 0, 1, 2), [0.1, 0.1, 0.1], [0.3, 0.3, 0.3], method="schur"
            )
