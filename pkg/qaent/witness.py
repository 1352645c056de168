"""
Entanglement witnesses: the susceptibility witness W_chi and the
partial-transpose witness W_AB with its population-constrained SDP bound,
plus the Hamiltonian-perturbation robustness study.
"""

from collections.abc import Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
import scipy.linalg

from .constants import (
    DEGENERACY_GAP_GHZ,
    DELTA_FRACTIONAL_ERROR,
    ESCALE_FRACTIONAL_ERROR,
    HERMITICITY_TOL,
    PPT_TOL,
    RICHARDSON_WARN,
    SDP_MAX_ITER,
    SDP_TOLERANCE,
    SUSCEPTIBILITY_STEP,
)
from .entangle import (
    Bipartition,
    enumerate_bipartitions,
    geometric_mean,
    partial_transpose,
    random_product_states,
)
from .exceptions import (
    DegenerateGroundStateError,
    InfeasibleConstraintsError,
    NoWitnessError,
    NumericalError,
    UndefinedCutError,
    ValidationError,
)
from .model import AnnealSchedule, ProblemInstance, assemble_hamiltonian, perturb_instance
from .sdp import SdpResult, maximize_expectation
from .spectra import Spectrum, eigendecompose, fix_phases
from .thermal import Temperature, thermal_expectation_z
from .utils import hermiticity_error, hermitize, logger, parallel_map, spawn_generators

_NORM_TOL = 1e-8
_PRODUCT_BATCH = 2000


class Measured(BaseModel):
    """A measured quantity with a symmetric one-sigma error."""

    model_config = ConfigDict(frozen=True)

    value: float
    error: float = Field(0.0, ge=0)


# --- Susceptibility witness ---
class SusceptibilityMatrix(BaseModel):
    """chi_ij = d<sigma^z_i>/d(E h_j) in 1/GHz, evaluated at h = 0."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    chi: np.ndarray
    s: float
    temperature_mk: float | None = Field(None, description="None for the ground state")
    energy_scale: float = Field(..., gt=0, description="E(s) in GHz")
    step: float
    richardson_delta: float = Field(
        0.0, description="Relative change between step and step/2 estimates"
    )

    @property
    def asymmetry(self) -> float:
        scale = max(float(np.max(np.abs(self.chi))), 1e-300)
        return float(np.max(np.abs(self.chi - self.chi.T))) / scale


def _response_column(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    T: Temperature | None,
    qubit: int,
    step: float,
) -> np.ndarray:
    responses = []
    for sign in (1.0, -1.0):
        biases = list(instance.h)
        biases[qubit] = sign * step
        shifted = instance.model_copy(update={"h": tuple(biases)})
        spec = eigendecompose(assemble_hamiltonian(shifted, schedule, s))
        responses.append(thermal_expectation_z(spec, T))
    return (responses[0] - responses[1]) / (2.0 * step)


def cross_susceptibility(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    T: Temperature | None = None,
    step: float = SUSCEPTIBILITY_STEP,
    workers: int = 1,
) -> SusceptibilityMatrix:
    """
    Linear cross-susceptibilities at the degeneracy point.

    Each column j comes from a central difference of <sigma^z_i> with the bias
    of qubit j alone set to +step and -step. The estimate is repeated at
    step/2 and Richardson-extrapolated; the relative change is recorded and a
    warning is logged when it exceeds 1e-3.

    Args:
        instance: Unbiased instance
        schedule: Anneal schedule
        s: Anneal fraction
        T: Temperature, or None for the ground state
        step: Dimensionless bias step
        workers: Parallel column workers

    Returns:
        Susceptibility matrix in 1/GHz

    Raises:
        ValidationError: Biased instance or non-positive step
        DegenerateGroundStateError: Gap below 1e-6 GHz at the evaluation point
    """
    if not step > 0:
        raise ValidationError(f"step must be > 0, got {step}")
    if not instance.is_unbiased:
        raise ValidationError("cross-susceptibility is evaluated at h = 0")
    _, escale = schedule.at(s)
    if escale <= 0:
        raise ValidationError(f"E(s) must be > 0 at s={s}")
    gap = eigendecompose(assemble_hamiltonian(instance, schedule, s)).gap
    if gap < DEGENERACY_GAP_GHZ:
        raise DegenerateGroundStateError(gap, DEGENERACY_GAP_GHZ)

    def estimate(h_step: float) -> np.ndarray:
        columns = parallel_map(
            lambda j: _response_column(instance, schedule, s, T, j, h_step),
            range(instance.n),
            workers,
        )
        return np.column_stack(columns) / escale

    coarse = estimate(step)
    fine = estimate(step / 2)
    extrapolated = (4.0 * fine - coarse) / 3.0
    scale = max(float(np.max(np.abs(fine))), 1e-300)
    richardson = float(np.max(np.abs(fine - coarse))) / scale
    if richardson > RICHARDSON_WARN:
        logger.warning(
            f"Susceptibility at s={s} changes by {richardson:.2e} when the step is "
            f"halved; consider a smaller step than {step}"
        )
    return SusceptibilityMatrix(
        chi=extrapolated,
        s=s,
        temperature_mk=None if T is None else T.millikelvin,
        energy_scale=escale,
        step=step,
        richardson_delta=richardson,
    )


class SusceptibilityComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    ground: SusceptibilityMatrix
    thermal: SusceptibilityMatrix
    max_relative_deviation: float


def compare_thermal_susceptibility(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    T: Temperature,
    step: float = SUSCEPTIBILITY_STEP,
) -> SusceptibilityComparison:
    """Thermal chi against the ground-state chi, as a max relative deviation."""
    ground = cross_susceptibility(instance, schedule, s, None, step)
    thermal = cross_susceptibility(instance, schedule, s, T, step)
    scale = max(float(np.max(np.abs(ground.chi))), 1e-300)
    deviation = float(np.max(np.abs(thermal.chi - ground.chi))) / scale
    logger.info(f"Thermal chi at {T.millikelvin} mK deviates by {deviation:.3%} at s={s}")
    return SusceptibilityComparison(
        ground=ground, thermal=thermal, max_relative_deviation=deviation
    )


def crossing_couplings(instance: ProblemInstance, part: Bipartition) -> list[tuple[int, int, float]]:
    """Nonzero couplings with one end in A and the other in B, as (a, b, J)."""
    in_a = set(part.a)
    crossing = []
    for i, j, value in instance.couplings:
        if value != 0 and (i in in_a) != (j in in_a):
            crossing.append((i, j, value) if i in in_a else (j, i, value))
    return crossing


def witness_R(
    chi: SusceptibilityMatrix,
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    part: Bipartition,
) -> float:
    """
    R_AB = |sum_{i in A, j in B} E J_ij chi_ij| / (4 N_AB).

    Every crossing coupling contributes once with chi taken symmetric, so
    swapping A and B leaves R unchanged.

    Raises:
        UndefinedCutError: No nonzero coupling crosses the cut
    """
    if part.n != instance.n:
        raise ValidationError(f"bipartition is for {part.n} qubits, instance has {instance.n}")
    crossing = crossing_couplings(instance, part)
    if not crossing:
        raise UndefinedCutError(part.partition_id)
    escale = schedule.energy_scale_at(s)
    symmetric = (chi.chi + chi.chi.T) / 2
    total = sum(escale * value * symmetric[i, j] for i, j, value in crossing)
    return float(abs(total) / (4 * len(crossing)))


def witness_Wchi(r_values: Sequence[float] | np.ndarray) -> float:
    """sqrt(g / (1 + g)) with g the geometric mean of R over the bipartitions."""
    g = geometric_mean(r_values)
    if np.isinf(g):
        return 1.0
    return float(np.sqrt(g / (1 + g)))


def susceptibility_witness(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    T: Temperature | None = None,
    parts: Sequence[Bipartition] | None = None,
    step: float = SUSCEPTIBILITY_STEP,
    workers: int = 1,
) -> tuple[float, dict[int, float]]:
    """W_chi at s together with R_AB keyed by partition id."""
    chi = cross_susceptibility(instance, schedule, s, T, step, workers)
    parts = enumerate_bipartitions(instance.n) if parts is None else list(parts)
    r_values = {p.partition_id: witness_R(chi, instance, schedule, s, p) for p in parts}
    return witness_Wchi(list(r_values.values())), r_values


# --- Partial-transpose witness ---
class WitnessOperator(BaseModel):
    """W = |phi><phi|^T_A, nonnegative on every state separable across the cut."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    partition: Bipartition
    built_from: str = Field("psi1", description="Eigenstate the witness targets")
    ppt_eigenvalue: float = Field(..., description="Most negative eigenvalue of psi^T_A")

    @model_validator(mode="after")
    def _check_matrix(self) -> "WitnessOperator":
        if self.matrix.shape != (2**self.partition.n,) * 2:
            raise ValidationError(f"witness shape {self.matrix.shape} does not match cut")
        if hermiticity_error(self.matrix) > HERMITICITY_TOL:
            raise ValidationError("witness is not Hermitian")
        self.matrix.setflags(write=False)
        return self

    def expectation(self, rho: np.ndarray) -> float:
        return float(np.real(np.vdot(self.matrix, rho)))


def construct_witness_operator(
    psi1: np.ndarray, part: Bipartition, built_from: str = "psi1"
) -> WitnessOperator:
    """
    Witness from the most negative eigenvector phi of |psi1><psi1|^T_A.

    When that eigenvalue is degenerate the vector returned by the eigensolver
    is used after the phase convention of :func:`fix_phases`.

    Raises:
        ValidationError: psi1 is not normalized or does not match the cut
        NoWitnessError: psi1 has a positive partial transpose across the cut
    """
    psi = np.asarray(psi1)
    if psi.ndim != 1 or psi.size != 2**part.n:
        raise ValidationError(f"state of size {psi.size} does not match {part.n} qubits")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1) > _NORM_TOL:
        raise ValidationError(f"state is not normalized (|psi| = {norm:.10f})")
    values, vectors = scipy.linalg.eigh(
        hermitize(partial_transpose(np.outer(psi, psi.conj()), part))
    )
    lowest = float(values[0])
    if lowest > -PPT_TOL:
        raise NoWitnessError(part.partition_id, lowest)
    phi = fix_phases(vectors[:, :1])[:, 0]
    matrix = hermitize(partial_transpose(np.outer(phi, phi.conj()), part))
    return WitnessOperator(
        matrix=matrix, partition=part, built_from=built_from, ppt_eigenvalue=lowest
    )


def check_separable_positivity(
    w: WitnessOperator, samples: int = 10_000, rng: np.random.Generator | None = None
) -> float:
    """Smallest Tr[W sigma] over random pure product states sigma_A x sigma_B."""
    rng = rng if rng is not None else np.random.default_rng(0)
    lowest = np.inf
    for start in range(0, samples, _PRODUCT_BATCH):
        states = random_product_states(w.partition, min(_PRODUCT_BATCH, samples - start), rng)
        values = np.real(np.einsum("si,ij,sj->s", states.conj(), w.matrix, states))
        lowest = min(lowest, float(values.min()))
    return float(lowest)


def sdp_upper_bound(
    w: WitnessOperator,
    spec: Spectrum,
    p1: Measured,
    p2: Measured,
    tol: float = SDP_TOLERANCE,
    max_iter: int = SDP_MAX_ITER,
) -> SdpResult:
    """
    Largest Tr[W rho] over states whose populations of the two lowest
    eigenstates lie within the measured error bars.

    Raises:
        InfeasibleConstraintsError: No density matrix satisfies the bars
    """
    if spec.dim != w.matrix.shape[0]:
        raise ValidationError(f"spectrum dimension {spec.dim} does not match the witness")
    result = maximize_expectation(
        w.matrix,
        np.column_stack([spec.state(0), spec.state(1)]),
        lower=[p1.value - p1.error, p2.value - p2.error],
        upper=[p1.value + p1.error, p2.value + p2.error],
        tol=tol,
        max_iter=max_iter,
    )
    if result.status == "infeasible":
        raise InfeasibleConstraintsError(
            f"population bounds admit no state: {result.dual_certificate['reason']}",
            result.dual_certificate,
        )
    return result


class CutCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    partition_id: int
    ppt_eigenvalue: float
    bound: float
    bound_err_lo: float = float("nan")
    bound_err_hi: float = float("nan")
    status: str
    certified: bool


def certify_cut(
    spec: Spectrum,
    part: Bipartition,
    p1: Measured,
    p2: Measured,
    bands: bool = False,
    tol: float = SDP_TOLERANCE,
    max_iter: int = SDP_MAX_ITER,
) -> CutCertificate:
    """
    Build W for the ground state across ``part`` and bound it under the
    population bars.

    With ``bands`` the bound is also evaluated with exact populations and with
    doubled error bars; the differences are reported as lower and upper
    sensitivities. A ground state with no negative partial transpose across
    the cut yields an uncertified row.
    """
    try:
        w = construct_witness_operator(spec.state(0), part)
    except NoWitnessError as e:
        logger.debug(f"Cut {part.partition_id}: {e.message}")
        return CutCertificate(
            partition_id=part.partition_id,
            ppt_eigenvalue=e.details["min_eigenvalue"],
            bound=float("nan"),
            status="no-witness",
            certified=False,
        )
    result = sdp_upper_bound(w, spec, p1, p2, tol, max_iter)
    err_lo = err_hi = float("nan")
    if bands:
        exact = sdp_upper_bound(
            w, spec, Measured(value=p1.value), Measured(value=p2.value), tol, max_iter
        )
        loose = sdp_upper_bound(
            w,
            spec,
            Measured(value=p1.value, error=2 * p1.error),
            Measured(value=p2.value, error=2 * p2.error),
            tol,
            max_iter,
        )
        err_lo = result.upper_bound - exact.upper_bound
        err_hi = loose.upper_bound - result.upper_bound
    return CutCertificate(
        partition_id=part.partition_id,
        ppt_eigenvalue=w.ppt_eigenvalue,
        bound=result.upper_bound,
        bound_err_lo=err_lo,
        bound_err_hi=err_hi,
        status=result.status,
        certified=result.certified,
    )


def witness_report(
    spec: Spectrum,
    p1: Measured,
    p2: Measured,
    parts: Sequence[Bipartition] | None = None,
    s: float = float("nan"),
    r_values: dict[int, float] | None = None,
    bands: bool = False,
    workers: int = 1,
    tol: float = SDP_TOLERANCE,
    max_iter: int = SDP_MAX_ITER,
) -> pd.DataFrame:
    """
    One row per cut with columns s, partition_id, r_ab, bound, bound_err_lo,
    bound_err_hi, certified, status and ppt_eigenvalue.
    """
    parts = enumerate_bipartitions(spec.n_qubits) if parts is None else list(parts)
    rows = parallel_map(
        lambda p: certify_cut(spec, p, p1, p2, bands, tol, max_iter), parts, workers
    )
    frame = pd.DataFrame([row.model_dump() for row in rows])
    frame.insert(0, "s", s)
    frame.insert(
        2,
        "r_ab",
        [np.nan if r_values is None else r_values.get(pid, np.nan) for pid in frame["partition_id"]],
    )
    certified = int(frame["certified"].sum())
    logger.info(f"Witness bounds at s={s:.4g}: {certified}/{len(parts)} cuts certified")
    return frame[
        [
            "s",
            "partition_id",
            "r_ab",
            "bound",
            "bound_err_lo",
            "bound_err_hi",
            "certified",
            "status",
            "ppt_eigenvalue",
        ]
    ]


# --- Robustness ---
class RobustnessSummary(BaseModel):
    """Distribution of the witness bound over perturbed Hamiltonians."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    s: float
    partition_id: int
    samples: int
    certified_fraction: float
    quantiles: dict[str, float]
    failures: int
    unperturbed_bound: float
    bounds: np.ndarray

    def to_row(self) -> dict[str, float | int]:
        return {
            "s": self.s,
            "partition_id": self.partition_id,
            "samples": self.samples,
            "certified_fraction": self.certified_fraction,
            "failures": self.failures,
            "unperturbed_bound": self.unperturbed_bound,
            **self.quantiles,
        }


def _perturbed_bound(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    part: Bipartition,
    p1: Measured,
    p2: Measured,
    h_uniform: float | None,
) -> float:
    spec = eigendecompose(assemble_hamiltonian(instance, schedule, s, h_uniform))
    w = construct_witness_operator(spec.state(0), part)
    return sdp_upper_bound(w, spec, p1, p2).upper_bound


def robustness_monte_carlo(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    part: Bipartition,
    p1: Measured,
    p2: Measured,
    delta_scale: float = DELTA_FRACTIONAL_ERROR,
    coupling_scale: float = ESCALE_FRACTIONAL_ERROR,
    samples: int = 1000,
    seed: int | np.random.SeedSequence = 0,
    workers: int = 1,
    h_uniform: float | None = None,
) -> RobustnessSummary:
    """
    Re-derive the witness bound for perturbed Hamiltonians.

    Every sample redraws per-qubit Delta and per-coupling factors, rebuilds
    psi1, psi2 and W from the perturbed spectrum and re-solves the bound with
    the same population bars. Samples whose witness or solve fails are counted
    as failures and as uncertified.

    Args:
        instance: Unperturbed instance
        schedule: Anneal schedule
        s: Anneal fraction
        part: Cut to certify
        p1: Ground-state population with error
        p2: First-excited population with error
        delta_scale: Fractional Delta spread
        coupling_scale: Fractional coupling spread
        samples: Number of perturbed Hamiltonians
        seed: Root seed; results do not depend on ``workers``
        workers: Parallel sample workers
        h_uniform: Optional uniform bias for every qubit

    Returns:
        Robustness summary with bound quantiles
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    if delta_scale < 0 or coupling_scale < 0:
        raise ValidationError("perturbation scales must be >= 0")
    unperturbed = _perturbed_bound(instance, schedule, s, part, p1, p2, h_uniform)

    def sample(rng: np.random.Generator) -> float:
        perturbed = perturb_instance(instance, rng, delta_scale, coupling_scale)
        try:
            return _perturbed_bound(perturbed, schedule, s, part, p1, p2, h_uniform)
        except NumericalError as e:
            logger.warning(f"Robustness sample failed at s={s}: {e.message}")
            return float("nan")

    bounds = np.array(parallel_map(sample, spawn_generators(seed, samples), workers))
    finite = bounds[np.isfinite(bounds)]
    levels = (5, 25, 50, 75, 95)
    values = np.quantile(finite, [q / 100 for q in levels]) if finite.size else [np.nan] * 5
    summary = RobustnessSummary(
        s=s,
        partition_id=part.partition_id,
        samples=samples,
        certified_fraction=float(np.sum(finite < 0)) / samples,
        quantiles={f"q{q:02d}": float(v) for q, v in zip(levels, values)},
        failures=int(samples - finite.size),
        unperturbed_bound=unperturbed,
        bounds=bounds,
    )
    logger.info(
        f"Robustness at s={s}, cut {part.partition_id}: "
        f"{summary.certified_fraction:.1%} of {samples} samples certified, "
        f"{summary.failures} failures"
    )
    return summary
