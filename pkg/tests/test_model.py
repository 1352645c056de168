"""
Tests for schedules, instances and Hamiltonian assembly.
"""

import io
import json

import numpy as np
import pytest

from qaent.exceptions import (
    CapacityError,
    InstanceError,
    ProbeConstraintError,
    ScheduleDomainError,
    ScheduleParseError,
    ValidationError,
)
from qaent.model import (
    SYNTHETIC_LABEL,
    AnnealSchedule,
    ProbeConfig,
    assemble_hamiltonian,
    assemble_probe_hamiltonian,
    build_instance,
    flat_schedule,
    load_instance,
    load_schedule,
    perturb_instance,
    preset,
    problem_diagonal,
    sigma_z_table,
    write_schedule,
)


class TestSchedule:
    def test_synthetic_endpoints(self, synthetic):
        assert synthetic.label == SYNTHETIC_LABEL
        assert synthetic.at(0.0) == pytest.approx((10.0, 0.1))
        assert synthetic.energy_scale_at(1.0) == pytest.approx(8.0)
        assert synthetic.delta_at(1.0) == 0.0

    def test_synthetic_is_monotone(self, synthetic):
        assert np.all(np.diff(synthetic.delta) <= 0)
        assert np.all(np.diff(synthetic.energy_scale) > 0)

    def test_linear_interpolation(self):
        schedule = AnnealSchedule(
            s=(0.0, 1.0), delta=(4.0, 0.0), energy_scale=(0.0, 2.0)
        )
        assert schedule.at(0.25) == pytest.approx((3.0, 0.5))

    def test_outside_domain(self, synthetic):
        with pytest.raises(ScheduleDomainError):
            synthetic.at(1.2)

    def test_load_with_label_and_comments(self):
        text = (
            "# label: bench-7\n"
            "s,delta_ghz,escale_ghz\n"
            "\n"
            "0.0,5.0,0.5\n"
            "# midpoint\n"
            "0.5,2.0,1.0\n"
            "1.0,0.0,3.0\n"
        )
        schedule = load_schedule(io.StringIO(text))
        assert schedule.label == "bench-7"
        assert schedule.s == (0.0, 0.5, 1.0)
        assert schedule.delta_at(0.75) == pytest.approx(1.0)

    def test_bad_row_reports_line(self):
        text = "s,delta_ghz,escale_ghz\n0.0,5.0,0.5\n0.5,abc,1.0\n"
        with pytest.raises(ScheduleParseError) as exc_info:
            load_schedule(io.StringIO(text))
        assert exc_info.value.line == 3

    def test_missing_header(self):
        with pytest.raises(ScheduleParseError):
            load_schedule(io.StringIO("0.0,5.0,0.5\n"))

    def test_duplicate_s_rejected(self):
        text = "s,delta_ghz,escale_ghz\n0.0,5.0,0.5\n0.0,4.0,0.6\n"
        with pytest.raises(ValidationError, match="Duplicate"):
            load_schedule(io.StringIO(text))

    def test_written_schedule_reloads(self, synthetic, tmp_path):
        path = tmp_path / "schedule.csv"
        write_schedule(synthetic, path)
        reloaded = load_schedule(path)
        assert reloaded.label == SYNTHETIC_LABEL
        assert reloaded.at(0.37) == pytest.approx(synthetic.at(0.37), rel=1e-10)


class TestInstance:
    def test_couplings_are_canonical(self):
        instance = build_instance(3, couplings=[(2, 0, -1.0), (1, 0, 0.5)])
        assert instance.couplings == ((0, 1, 0.5), (0, 2, -1.0))
        assert instance.h == (0.0, 0.0, 0.0)
        assert instance.is_unbiased

    def test_self_coupling_rejected(self):
        with pytest.raises(InstanceError):
            build_instance(2, couplings=[(1, 1, -1.0)])

    def test_duplicate_pair_rejected(self):
        with pytest.raises(InstanceError):
            build_instance(2, couplings=[(0, 1, -1.0), (1, 0, -2.0)])

    def test_capacity(self):
        with pytest.raises(CapacityError):
            build_instance(13)

    @pytest.mark.parametrize(
        ("name", "n", "edges"),
        [("fm2", 2, 1), ("fm8", 8, 8), ("fm3", 3, 3), ("chain5", 5, 4)],
    )
    def test_presets(self, name, n, edges):
        instance = preset(name)
        assert instance.n == n
        assert len(instance.couplings) == edges
        assert all(value == -2.5 for _, _, value in instance.couplings)

    def test_unknown_preset(self):
        with pytest.raises(InstanceError):
            preset("antiferro4")

    def test_load_instance_file(self, tmp_path):
        path = tmp_path / "pair.json"
        path.write_text(
            json.dumps({"n": 2, "h": [0.1, -0.1], "j": [[1, 0, -1.5]]}), encoding="utf-8"
        )
        instance = load_instance(path)
        assert instance.name == "pair"
        assert instance.couplings == ((0, 1, -1.5),)
        assert not instance.is_unbiased

    def test_malformed_instance_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"n": "two"}', encoding="utf-8")
        with pytest.raises(InstanceError):
            load_instance(path)

    def test_perturbation_is_seeded(self, fm4):
        first = perturb_instance(fm4, np.random.default_rng(7), 0.08, 0.05)
        second = perturb_instance(fm4, np.random.default_rng(7), 0.08, 0.05)
        assert first == second
        assert first.multipliers.shape == (4,)
        assert first.couplings != fm4.couplings

    def test_zero_perturbation_is_identity(self, fm4):
        same = perturb_instance(fm4, np.random.default_rng(7), 0.0, 0.0)
        assert same.couplings == fm4.couplings
        assert np.allclose(same.multipliers, 1.0)


class TestHamiltonian:
    def test_basis_convention(self):
        table = sigma_z_table(2)
        # index 0 is all up, qubit 0 is the most significant bit
        assert table[0].tolist() == [1.0, 1.0]
        assert table[2].tolist() == [-1.0, 1.0]

    @pytest.mark.parametrize("n", range(1, 9))
    def test_basis_strings_round_trip(self, n):
        table = sigma_z_table(n)
        bits = ((1 - table) // 2).astype(int)
        strings = ["".join(map(str, row)) for row in bits]
        assert strings == [np.binary_repr(k, width=n) for k in range(2**n)]
        weights = 2 ** (n - 1 - np.arange(n))
        assert np.array_equal(bits @ weights, np.arange(2**n))

    def test_problem_diagonal(self):
        instance = build_instance(2, h=[0.5, 0.0], couplings=[(0, 1, -2.5)])
        diag = problem_diagonal(instance)
        assert diag.tolist() == pytest.approx([-3.0, 2.0, 3.0, -2.0])

    def test_transverse_terms(self, fm2):
        matrix = assemble_hamiltonian(fm2, flat_schedule(3.0, 1.0), 0.5).matrix
        assert matrix[0, 1] == pytest.approx(-1.5)
        assert matrix[0, 2] == pytest.approx(-1.5)
        assert matrix[0, 3] == 0.0
        assert matrix[0, 0] == pytest.approx(-2.5)

    def test_delta_multipliers(self, fm2):
        scaled = fm2.model_copy(update={"delta_multipliers": (2.0, 0.0)})
        matrix = assemble_hamiltonian(scaled, flat_schedule(3.0, 1.0), 0.5).matrix
        assert matrix[0, 2] == pytest.approx(-3.0)
        assert matrix[0, 1] == 0.0

    def test_operator_is_read_only(self, fm2, synthetic):
        op = assemble_hamiltonian(fm2, synthetic, 0.3)
        assert op.dim == 4
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 1.0

    def test_probe_blocks(self, fm2, flat):
        probe = ProbeConfig(delta_p=0.001, j_p=-1.0)
        full = assemble_probe_hamiltonian(fm2, flat, 0.5, probe, eps_p=0.7).matrix
        system = assemble_hamiltonian(fm2, flat, 0.5).matrix
        z0 = sigma_z_table(2)[:, 0]
        assert np.allclose(full[:4, :4], system)
        assert np.allclose(full[4:, 4:], system - np.diag(-2.0 * z0) + 0.7 * np.eye(4))
        assert np.allclose(full[:4, 4:], -0.0005 * np.eye(4))

    def test_probe_up_block_is_the_bare_system(self, rng):
        sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
        for _ in range(100):
            n = int(rng.integers(1, 5))
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.uniform() < 0.6]
            instance = build_instance(
                n,
                h=rng.uniform(-0.5, 0.5, n).tolist(),
                couplings=[(i, j, rng.uniform(-3.0, 3.0)) for i, j in pairs],
            )
            schedule = flat_schedule(rng.uniform(0.5, 5.0), rng.uniform(0.1, 2.0))
            probe = ProbeConfig(
                delta_p=rng.uniform(0.0, 0.005),
                j_p=rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]),
                attach_to=int(rng.integers(n)),
            )
            eps_p = rng.uniform(-3.0, 3.0)
            full = assemble_probe_hamiltonian(instance, schedule, 0.5, probe, eps_p).matrix
            system = assemble_hamiltonian(instance, schedule, 0.5).matrix
            dim = system.shape[0]
            z_attach = np.diag(sigma_z_table(n)[:, probe.attach_to])
            expected = (
                np.kron(np.eye(2), system)
                - np.kron(np.diag([0.0, 2.0]), probe.j_p * z_attach - 0.5 * eps_p * np.eye(dim))
                - 0.5 * probe.delta_p * np.kron(sigma_x, np.eye(dim))
            )
            assert np.max(np.abs(full[:dim, :dim] - system)) < 1e-12
            assert np.max(np.abs(full - expected)) < 1e-12

    def test_weak_probe_check(self):
        probe = ProbeConfig(delta_p=0.1, j_p=-1.0)
        with pytest.raises(ProbeConstraintError):
            probe.check_weak(delta=3.0)
        ProbeConfig(delta_p=0.001, j_p=-1.0).check_weak(delta=3.0)

    def test_zero_probe_coupling_rejected(self):
        with pytest.raises(ValidationError):
            ProbeConfig(delta_p=0.001, j_p=0.0)
