"""
Entanglement measures: partial transpose, negativity over bipartitions,
Wootters concurrence and entanglement of formation, plus the measure series
along an anneal.
"""

from collections.abc import Callable, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
import scipy.linalg
from scipy.special import entr
from scipy.stats import gmean

from .constants import (
    DELTA_FRACTIONAL_ERROR,
    ESCALE_FRACTIONAL_ERROR,
    MAX_QUBITS,
    NEGATIVITY_FLOOR,
)
from .exceptions import ValidationError
from .model import AnnealSchedule, ProblemInstance, assemble_hamiltonian, perturb_instance
from .spectra import eigendecompose
from .thermal import (
    DensityMatrix,
    Temperature,
    build_density_matrix,
    equilibrium_populations,
)
from .utils import as_grid, logger, parallel_map, spawn_generators

# eigenvalues of rho below this are treated as exact zeros in the concurrence
_RANK_CUTOFF = 1e-14
_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.real(np.kron(_SIGMA_Y, _SIGMA_Y))


class Bipartition(BaseModel):
    """Split of n qubits into A and B; canonical form keeps qubit 0 in A."""

    model_config = ConfigDict(frozen=True)

    a: tuple[int, ...] = Field(..., description="Qubits in subsystem A, sorted")
    n: int = Field(..., description="Total qubit count")

    @model_validator(mode="before")
    @classmethod
    def _canonical(cls, data: dict) -> dict:
        n = int(data["n"])
        a = sorted({int(q) for q in data["a"]})
        if not a or len(a) >= n:
            raise ValidationError(f"A={a} must be a nonempty proper subset of {n} qubits")
        if a[0] < 0 or a[-1] >= n:
            raise ValidationError(f"A={a} has indices outside 0..{n - 1}")
        if 0 not in a:
            a = [q for q in range(n) if q not in a]
        return {"a": tuple(a), "n": n}

    @property
    def b(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if q not in self.a)

    @property
    def partition_id(self) -> int:
        """Bitmask of A with bit q set for qubit q."""
        return sum(1 << q for q in self.a)

    @classmethod
    def from_id(cls, partition_id: int, n: int) -> "Bipartition":
        return cls(a=tuple(q for q in range(n) if partition_id >> q & 1), n=n)

    def __str__(self) -> str:
        return f"{set(self.a)}|{set(self.b)}"


def enumerate_bipartitions(n: int) -> list[Bipartition]:
    """All 2^(n-1) - 1 canonical bipartitions of n qubits."""
    if not 2 <= n <= MAX_QUBITS:
        raise ValidationError(f"bipartitions need 2 <= n <= {MAX_QUBITS}, got {n}")
    others = range(1, n)
    parts = []
    for mask in range(2 ** (n - 1) - 1):
        a = (0, *(q for k, q in enumerate(others) if mask >> k & 1))
        parts.append(Bipartition(a=a, n=n))
    return parts


def _matrix(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _qubits(matrix: np.ndarray) -> int:
    dim = matrix.shape[0]
    n = int(round(np.log2(dim))) if dim > 0 else 0
    if matrix.ndim != 2 or matrix.shape != (dim, dim) or 2**n != dim:
        raise ValidationError(f"expected a 2^n x 2^n matrix, got {matrix.shape}")
    return n


def partial_transpose(rho: DensityMatrix | np.ndarray, part: Bipartition) -> np.ndarray:
    """Transpose the row and column indices of every qubit in A."""
    m = _matrix(rho)
    n = _qubits(m)
    if part.n != n:
        raise ValidationError(f"bipartition is for {part.n} qubits, matrix has {n}")
    axes = list(range(2 * n))
    for q in part.a:
        axes[q], axes[n + q] = axes[n + q], axes[q]
    return m.reshape((2,) * (2 * n)).transpose(axes).reshape(m.shape)


def negativity(rho: DensityMatrix | np.ndarray, part: Bipartition) -> float:
    """Sum of |negative eigenvalues| of rho^T_A, i.e. (||rho^T_A||_1 - 1) / 2."""
    eigenvalues = scipy.linalg.eigvalsh(partial_transpose(rho, part))
    value = float(-np.sum(eigenvalues[eigenvalues < 0]))
    return value if value > NEGATIVITY_FLOOR else 0.0


def negativity_profile(
    rho: DensityMatrix | np.ndarray,
    parts: Sequence[Bipartition] | None = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Negativity of every bipartition, with columns partition_id and negativity."""
    n = _qubits(_matrix(rho))
    parts = enumerate_bipartitions(n) if parts is None else list(parts)
    values = parallel_map(lambda p: negativity(rho, p), parts, workers)
    return pd.DataFrame(
        {"partition_id": [p.partition_id for p in parts], "negativity": values}
    )


def geometric_mean(values: Sequence[float] | np.ndarray) -> float:
    """Geometric mean that is exactly zero when any value is zero."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValidationError("geometric mean of an empty set")
    if np.any(v <= 0):
        return 0.0
    return float(gmean(v))


def global_negativity(
    rho: DensityMatrix | np.ndarray,
    parts: Sequence[Bipartition] | None = None,
    workers: int = 1,
) -> float:
    """Geometric mean of the negativity over all (or the given) bipartitions."""
    return geometric_mean(negativity_profile(rho, parts, workers)["negativity"])


def concurrence(rho: DensityMatrix | np.ndarray) -> float:
    """
    Wootters concurrence of a two-qubit state.

    The lambda_i are the singular values of V^T (sigma_y x sigma_y) V with
    rho = V V^+, which equal the square roots of the eigenvalues of
    rho (sigma_y x sigma_y) rho^* (sigma_y x sigma_y).
    """
    m = _matrix(rho)
    if m.shape != (4, 4):
        raise ValidationError(f"concurrence needs a 4x4 density matrix, got {m.shape}")
    weights, vectors = scipy.linalg.eigh(m)
    weights = np.where(weights > _RANK_CUTOFF, weights, 0.0)
    v = vectors * np.sqrt(weights)
    lam = scipy.linalg.svdvals(v.T @ _YY @ v)
    return float(max(0.0, lam[0] - np.sum(lam[1:])))


def entanglement_of_formation(c: float) -> float:
    """E_f = h2((1 + sqrt(1 - C^2)) / 2) in bits."""
    if not -1e-12 <= c <= 1 + 1e-12:
        raise ValidationError(f"concurrence must be in [0, 1], got {c}")
    c = min(max(c, 0.0), 1.0)
    x = (1 + np.sqrt(1 - c**2)) / 2
    return float((entr(x) + entr(1 - x)) / np.log(2))


def ghz_state(n: int) -> np.ndarray:
    """(|up...up> + |down...down>) / sqrt(2) as a state vector."""
    psi = np.zeros(2**n)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def bell_state() -> np.ndarray:
    return ghz_state(2)


def _to_global_order(tensor: np.ndarray, part: Bipartition, batch: bool) -> np.ndarray:
    order = list(part.a) + list(part.b)
    inverse = list(np.argsort(order))
    lead = 1 if batch else 0
    shape = tensor.shape
    n = part.n
    if tensor.ndim - lead == 1:
        axes = list(range(lead)) + [lead + k for k in inverse]
        return tensor.reshape(shape[:lead] + (2,) * n).transpose(axes).reshape(shape)
    axes = list(range(lead)) + [lead + k for k in inverse] + [lead + n + k for k in inverse]
    return tensor.reshape(shape[:lead] + (2,) * (2 * n)).transpose(axes).reshape(shape)


def embed_product(sigma_a: np.ndarray, sigma_b: np.ndarray, part: Bipartition) -> np.ndarray:
    """sigma_A x sigma_B laid out in the global qubit order."""
    return _to_global_order(np.kron(sigma_a, sigma_b), part, batch=False)


def random_product_states(
    part: Bipartition, count: int, rng: np.random.Generator
) -> np.ndarray:
    """(count, 2^n) random pure states psi_A x psi_B in the global qubit order."""
    dim_a, dim_b = 2 ** len(part.a), 2 ** len(part.b)

    def haar(dim: int) -> np.ndarray:
        z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
        return z / np.linalg.norm(z, axis=1, keepdims=True)

    joint = np.einsum("sa,sb->sab", haar(dim_a), haar(dim_b)).reshape(count, -1)
    return _to_global_order(joint, part, batch=True)


# --- Measure series ---
class MeasureSeries(BaseModel):
    """Concurrence, negativity and entanglement of formation along s."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    s: np.ndarray
    concurrence: np.ndarray
    concurrence_err: np.ndarray
    negativity: np.ndarray
    negativity_err: np.ndarray
    formation: np.ndarray
    concurrence_pure: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    witness: np.ndarray | None = None
    witness_err: np.ndarray | None = None

    @model_validator(mode="after")
    def _check_ranges(self) -> "MeasureSeries":
        def within(values: np.ndarray, lo: float, hi: float) -> bool:
            finite = values[np.isfinite(values)]
            return bool(np.all((finite >= lo - 1e-9) & (finite <= hi + 1e-9)))

        if not within(self.concurrence, 0, 1) or not within(self.formation, 0, 1):
            raise ValidationError("concurrence and E_f must lie in [0, 1]")
        if not within(self.negativity, 0, np.inf):
            raise ValidationError("negativity must be >= 0")
        return self

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "s": self.s,
                "C": self.concurrence,
                "C_err": self.concurrence_err,
                "N": self.negativity,
                "N_err": self.negativity_err,
                "Ef": self.formation,
                "C_pure": self.concurrence_pure,
                "P1": self.p1,
                "P2": self.p2,
            }
        )
        if self.witness is not None:
            frame["W_chi"] = self.witness
            frame["Wchi_err"] = self.witness_err
        return frame


def _point_measures(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    T: Temperature | None,
    levels: int,
) -> tuple[float, float, float, float, float]:
    """(C, N, C_pure, P1, P2) of the truncated equilibrium state at s; N needs two qubits."""
    spec = eigendecompose(assemble_hamiltonian(instance, schedule, s))
    p = equilibrium_populations(spec, T)
    rho = build_density_matrix(spec, p[:levels], truncate=levels)
    n_value = global_negativity(rho) if instance.n >= 2 else float("nan")
    if instance.n == 2:
        c_value = concurrence(rho)
        c_pure = concurrence(DensityMatrix.from_pure(spec.state(0)))
    else:
        c_value = c_pure = float("nan")
    return c_value, n_value, c_pure, float(p[0]), float(p[1]) if p.size > 1 else 0.0


def _spread(values: Sequence[float]) -> float:
    """Standard deviation over the finite values; nan when none are finite."""
    finite = np.asarray(values, dtype=float)
    finite = finite[np.isfinite(finite)]
    return float(np.std(finite)) if finite.size else float("nan")


def measure_series(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    T: Temperature | None,
    s_grid: Sequence[float] | np.ndarray,
    levels: int = 2,
    samples: int = 0,
    seed: int = 0,
    delta_error: float = DELTA_FRACTIONAL_ERROR,
    escale_error: float = ESCALE_FRACTIONAL_ERROR,
    workers: int = 1,
    witness: Callable[[ProblemInstance, float], float] | None = None,
) -> MeasureSeries:
    """
    Entanglement measures of the equilibrium state along the anneal.

    The state at each s is the Boltzmann (or ground) state truncated to the
    lowest ``levels`` eigenstates and renormalized. Uncertainty bands are the
    standard deviation over ``samples`` instances whose per-qubit Delta and
    couplings are resampled within the fractional errors.

    Args:
        instance: Problem instance (concurrence only for n = 2)
        schedule: Anneal schedule
        T: Temperature, or None for the ground state
        s_grid: Anneal fractions
        levels: Levels kept in the density matrix
        samples: Monte-Carlo resamples per point; 0 disables bands
        seed: Root seed of the resampling stream
        delta_error: Fractional spread of Delta
        escale_error: Fractional spread of the coupling energies
        workers: Parallel grid workers
        witness: Optional witness value of an instance at s, evaluated on the
            nominal instance and on the same resampled instances as the bands

    Returns:
        Measure series with bands
    """
    grid = as_grid(s_grid)
    streams = np.random.SeedSequence(seed).spawn(grid.size)

    def point(index: int) -> tuple[float, ...]:
        s = float(grid[index])
        c_value, n_value, c_pure, p1, p2 = _point_measures(instance, schedule, s, T, levels)
        w_value = witness(instance, s) if witness is not None else float("nan")
        c_err = n_err = w_err = 0.0
        if samples > 0:
            perturbed = [
                perturb_instance(instance, rng, delta_error, escale_error)
                for rng in spawn_generators(streams[index], samples)
            ]
            draws = [_point_measures(p, schedule, s, T, levels) for p in perturbed]
            c_err = _spread([d[0] for d in draws])
            n_err = _spread([d[1] for d in draws])
            if witness is not None:
                w_err = _spread([witness(p, s) for p in perturbed])
        return c_value, c_err, n_value, n_err, c_pure, p1, p2, w_value, w_err

    rows = np.array(parallel_map(point, range(grid.size), workers), dtype=float)
    concurrence_values = rows[:, 0]
    formation = np.array(
        [entanglement_of_formation(c) if np.isfinite(c) else np.nan for c in concurrence_values]
    )
    peak = np.nanmax(rows[:, 2]) if np.isfinite(rows[:, 2]).any() else float("nan")
    logger.info(
        f"Measure series for {instance.name or 'instance'}: {grid.size} points, "
        f"{samples} resamples each, max N {peak:.4g}"
    )
    return MeasureSeries(
        s=grid,
        concurrence=concurrence_values,
        concurrence_err=rows[:, 1],
        negativity=rows[:, 2],
        negativity_err=rows[:, 3],
        formation=formation,
        concurrence_pure=rows[:, 4],
        p1=rows[:, 5],
        p2=rows[:, 6],
        witness=rows[:, 7] if witness is not None else None,
        witness_err=rows[:, 8] if witness is not None else None,
    )
