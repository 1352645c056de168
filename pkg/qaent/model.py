"""
Anneal schedules, problem instances and dense Hamiltonian assembly.

Basis convention: qubit 0 is the most significant bit of a basis index and
spin up (sigma^z = +1) is bit 0. With a probe attached, the probe is placed
in front of the system register, so the sigma^z_P = +1 block is the top-left
2^n x 2^n block of the composite operator.
"""

from collections.abc import Iterable, Sequence
from functools import lru_cache
import io
from pathlib import Path
import re
from typing import Literal, TextIO

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .constants import (
    DEFAULT_LINEWIDTH_GHZ,
    DEFAULT_PROBE_RATIO,
    FERROMAGNETIC_J,
    HERMITICITY_TOL,
    MAX_COMPOSITE_QUBITS,
    MAX_QUBITS,
)
from .exceptions import (
    CapacityError,
    InstanceError,
    ProbeConstraintError,
    ScheduleDomainError,
    ScheduleParseError,
    ValidationError,
)
from .utils import hermiticity_error, logger

SCHEDULE_COLUMNS = ("s", "delta_ghz", "escale_ghz")
SYNTHETIC_LABEL = "SYNTHETIC"
_DOMAIN_SLACK = 1e-12
_FIELD_SPLIT = re.compile(r"\s*[,;\t]\s*|\s+")


# --- Schedules ---
class AnnealSchedule(BaseModel):
    """Tabulated energy scales Delta(s) and E(s), interpolated linearly in s."""

    model_config = ConfigDict(frozen=True)

    s: tuple[float, ...] = Field(..., description="Knot positions, strictly increasing")
    delta: tuple[float, ...] = Field(..., description="Transverse energy Delta(s), GHz")
    energy_scale: tuple[float, ...] = Field(
        ..., description="Longitudinal energy E(s), GHz"
    )
    label: str = Field("", description="Provenance tag (SYNTHETIC for the default)")

    @model_validator(mode="after")
    def _check_rows(self) -> "AnnealSchedule":
        s = np.asarray(self.s)
        if len(self.s) < 2:
            raise ValidationError("Schedule needs at least two rows")
        if not len(self.s) == len(self.delta) == len(self.energy_scale):
            raise ValidationError("Schedule columns have different lengths")
        values = np.concatenate([s, self.delta, self.energy_scale])
        if not np.all(np.isfinite(values)):
            raise ValidationError("Schedule contains non-finite values")
        if np.any(np.asarray(self.delta) < 0) or np.any(np.asarray(self.energy_scale) < 0):
            raise ValidationError("Schedule energies must be >= 0")
        steps = np.diff(s)
        if np.any(steps == 0):
            raise ValidationError(
                "Duplicate s value in schedule",
                details={"s": float(s[1:][steps == 0][0])},
            )
        if np.any(steps < 0):
            raise ValidationError("Schedule s values must be strictly increasing")
        return self

    @property
    def domain(self) -> tuple[float, float]:
        return self.s[0], self.s[-1]

    def _check_domain(self, s: float) -> None:
        s_min, s_max = self.domain
        if not np.isfinite(s) or s < s_min - _DOMAIN_SLACK or s > s_max + _DOMAIN_SLACK:
            raise ScheduleDomainError(s, s_min, s_max)

    def delta_at(self, s: float) -> float:
        self._check_domain(s)
        return float(np.interp(s, self.s, self.delta))

    def energy_scale_at(self, s: float) -> float:
        self._check_domain(s)
        return float(np.interp(s, self.s, self.energy_scale))

    def at(self, s: float) -> tuple[float, float]:
        """Return (Delta(s), E(s)) in GHz."""
        return self.delta_at(s), self.energy_scale_at(s)


def flat_schedule(delta: float, energy_scale: float, label: str = "FLAT") -> AnnealSchedule:
    """Schedule holding Delta and E constant over s in [0, 1]."""
    return AnnealSchedule(
        s=(0.0, 1.0),
        delta=(delta, delta),
        energy_scale=(energy_scale, energy_scale),
        label=label,
    )


def synthetic_schedule(knots: int = 201) -> AnnealSchedule:
    """
    Smooth monotone stand-in for a measured schedule.

    Delta falls from 10 GHz to zero, E rises from 0.1 GHz to 8 GHz. Values are
    illustrative only and the schedule is labelled SYNTHETIC.
    """
    s = np.linspace(0.0, 1.0, knots)
    delta = 10.0 * np.exp(-((s / 0.3445) ** 5.5))
    delta[-1] = 0.0
    escale = 0.1 + 7.9 * s**1.6
    return AnnealSchedule(
        s=tuple(s), delta=tuple(delta), energy_scale=tuple(escale), label=SYNTHETIC_LABEL
    )


def load_schedule(source: TextIO | str | Path) -> AnnealSchedule:
    """
    Parse a delimited schedule table with header ``s,delta_ghz,escale_ghz``.

    Blank lines and ``#`` comments are skipped. A comment of the form
    ``# label: NAME`` sets the schedule label.

    Args:
        source: Open text stream or path to the table

    Returns:
        Validated schedule

    Raises:
        ScheduleParseError: Malformed header or row (with line number)
        ValidationError: Non-monotone or duplicate s values
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
        name = str(source)
    else:
        text = source.read()
        name = getattr(source, "name", "<stream>")

    label = ""
    header: list[str] | None = None
    rows: list[list[str]] = []
    line_numbers: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("#").partition(":")
            if key.strip().lower() == "label" and value.strip():
                label = value.strip()
            continue
        fields = [f for f in _FIELD_SPLIT.split(line) if f]
        if header is None:
            header = [f.lower() for f in fields]
            if tuple(header) != SCHEDULE_COLUMNS:
                raise ScheduleParseError(
                    lineno, f"expected header {','.join(SCHEDULE_COLUMNS)}, got {line!r}"
                )
            continue
        if len(fields) != len(SCHEDULE_COLUMNS):
            raise ScheduleParseError(
                lineno, f"expected {len(SCHEDULE_COLUMNS)} fields, got {len(fields)}"
            )
        rows.append(fields)
        line_numbers.append(lineno)

    if header is None:
        raise ScheduleParseError(1, "missing header")
    if not rows:
        raise ScheduleParseError(len(text.splitlines()) or 1, "no data rows")

    frame = pd.DataFrame(rows, columns=list(SCHEDULE_COLUMNS)).apply(
        pd.to_numeric, errors="coerce"
    )
    bad = frame.isna().any(axis=1).to_numpy()
    if bad.any():
        index = int(np.argmax(bad))
        raise ScheduleParseError(
            line_numbers[index], f"non-numeric value in {', '.join(rows[index])}"
        )

    schedule = AnnealSchedule(
        s=tuple(frame["s"]),
        delta=tuple(frame["delta_ghz"]),
        energy_scale=tuple(frame["escale_ghz"]),
        label=label,
    )
    logger.debug(f"Loaded schedule {name}: {len(rows)} rows over {schedule.domain}")
    return schedule


def write_schedule(schedule: AnnealSchedule, target: TextIO | str | Path) -> None:
    """Write a schedule in the format read by :func:`load_schedule`."""
    frame = pd.DataFrame(
        {
            "s": schedule.s,
            "delta_ghz": schedule.delta,
            "escale_ghz": schedule.energy_scale,
        }
    )
    buffer = io.StringIO()
    if schedule.label:
        buffer.write(f"# label: {schedule.label}\n")
    frame.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    if isinstance(target, (str, Path)):
        Path(target).write_text(buffer.getvalue(), encoding="utf-8")
    else:
        target.write(buffer.getvalue())


# --- Problem instances ---
class ProblemInstance(BaseModel):
    """Dimensionless biases h_i and couplings J_ij of the problem Hamiltonian."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., description="Number of qubits")
    h: tuple[float, ...] = Field(..., description="Local biases h_i")
    couplings: tuple[tuple[int, int, float], ...] = Field(
        (), description="Couplings (i, j, J_ij) with i < j, sorted"
    )
    delta_multipliers: tuple[float, ...] | None = Field(
        None, description="Per-qubit factors applied to Delta(s)"
    )
    name: str = Field("", description="Preset or file name")

    @field_validator("n")
    @classmethod
    def validate_n(cls, v: int) -> int:
        if v > MAX_QUBITS:
            raise CapacityError(v, MAX_QUBITS)
        if v < 1:
            raise InstanceError(f"n must be >= 1, got {v}")
        return v

    @model_validator(mode="after")
    def _check_indices(self) -> "ProblemInstance":
        if len(self.h) != self.n:
            raise InstanceError(f"expected {self.n} biases, got {len(self.h)}")
        if not np.all(np.isfinite(self.h)):
            raise InstanceError("biases must be finite")
        seen: set[tuple[int, int]] = set()
        for i, j, value in self.couplings:
            if not (0 <= i < j < self.n):
                raise InstanceError(f"coupling ({i}, {j}) not canonical for n={self.n}")
            if (i, j) in seen:
                raise InstanceError(f"duplicate coupling ({i}, {j})")
            if not np.isfinite(value):
                raise InstanceError(f"coupling ({i}, {j}) is not finite")
            seen.add((i, j))
        if self.delta_multipliers is not None:
            mult = np.asarray(self.delta_multipliers)
            if mult.shape != (self.n,) or np.any(mult < 0) or not np.all(np.isfinite(mult)):
                raise InstanceError("delta_multipliers must be n finite values >= 0")
        return self

    def with_uniform_bias(self, h: float) -> "ProblemInstance":
        return self.model_copy(update={"h": (float(h),) * self.n})

    @property
    def multipliers(self) -> np.ndarray:
        if self.delta_multipliers is None:
            return np.ones(self.n)
        return np.asarray(self.delta_multipliers, dtype=float)

    @property
    def is_unbiased(self) -> bool:
        return not any(self.h)


def build_instance(
    n: int,
    h: Sequence[float] | None = None,
    couplings: Iterable[tuple[int, int, float]] = (),
    name: str = "",
) -> ProblemInstance:
    """
    Build a canonical instance, ordering every coupling as i < j.

    Args:
        n: Qubit count (1..12)
        h: Biases, zero when omitted
        couplings: (i, j, J_ij) triples in either index order
        name: Label carried into outputs

    Returns:
        Validated instance

    Raises:
        InstanceError: Self-coupling, out-of-range index or duplicate pair
        CapacityError: n above the dense limit
    """
    if n > MAX_QUBITS:
        raise CapacityError(n, MAX_QUBITS)
    canonical: dict[tuple[int, int], float] = {}
    for i, j, value in couplings:
        i, j = int(i), int(j)
        if i == j:
            raise InstanceError(f"self-coupling ({i}, {j}) is not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise InstanceError(f"coupling ({i}, {j}) out of range for n={n}")
        key = (min(i, j), max(i, j))
        if key in canonical:
            raise InstanceError(f"duplicate coupling {key}")
        canonical[key] = float(value)
    biases = tuple(float(x) for x in h) if h is not None else (0.0,) * n
    return ProblemInstance(
        n=n,
        h=biases,
        couplings=tuple((i, j, v) for (i, j), v in sorted(canonical.items())),
        name=name,
    )


def ferromagnetic_chain(n: int, coupling: float = FERROMAGNETIC_J) -> ProblemInstance:
    return build_instance(
        n, couplings=[(i, i + 1, coupling) for i in range(n - 1)], name=f"chain{n}"
    )


def ferromagnetic_ring(n: int, coupling: float = FERROMAGNETIC_J) -> ProblemInstance:
    if n < 3:
        raise InstanceError(f"a ring needs at least 3 qubits, got {n}")
    return build_instance(
        n, couplings=[(i, (i + 1) % n, coupling) for i in range(n)], name=f"fm{n}"
    )


def preset(name: str) -> ProblemInstance:
    """
    Named instances: ``fm2`` (coupled pair), ``fmN`` rings for N >= 3
    (``fm8`` is the eight-qubit ring) and ``chainN`` open chains.
    """
    match = re.fullmatch(r"(fm|chain)(\d+)", name.strip().lower())
    if not match:
        raise InstanceError(f"unknown preset {name!r}")
    kind, n = match.group(1), int(match.group(2))
    if n < 2:
        raise InstanceError(f"preset {name!r} needs at least 2 qubits")
    if kind == "chain" or n == 2:
        instance = ferromagnetic_chain(n)
        return instance.model_copy(update={"name": name.lower()})
    return ferromagnetic_ring(n)


class InstanceFile(BaseModel):
    """On-disk instance format."""

    n: int
    h: list[float] | None = None
    j: list[tuple[int, int, float]] = Field(default_factory=list)
    delta_multipliers: list[float] | None = None


def load_instance(path: str | Path) -> ProblemInstance:
    """Read an instance JSON file ``{"n": .., "h": [..], "j": [[i, j, J], ..]}``."""
    path = Path(path)
    try:
        spec = InstanceFile.model_validate_json(path.read_text(encoding="utf-8"))
    except PydanticValidationError as e:
        raise InstanceError(f"cannot parse {path}", details=e.errors()) from e
    instance = build_instance(spec.n, spec.h, spec.j, name=path.stem)
    if spec.delta_multipliers is not None:
        instance = ProblemInstance(
            **{
                **instance.model_dump(),
                "delta_multipliers": tuple(spec.delta_multipliers),
            }
        )
    return instance


def perturb_instance(
    instance: ProblemInstance,
    rng: np.random.Generator,
    delta_scale: float,
    coupling_scale: float,
) -> ProblemInstance:
    """
    Draw per-qubit Delta multipliers and per-coupling factors around one.

    Each factor is 1 + scale * N(0, 1); multipliers are clipped at zero.
    """
    mult = instance.multipliers * (1.0 + delta_scale * rng.standard_normal(instance.n))
    factors = 1.0 + coupling_scale * rng.standard_normal(len(instance.couplings))
    couplings = tuple(
        (i, j, value * f) for (i, j, value), f in zip(instance.couplings, factors)
    )
    return ProblemInstance(
        n=instance.n,
        h=instance.h,
        couplings=couplings,
        delta_multipliers=tuple(np.clip(mult, 0.0, None)),
        name=instance.name,
    )


# --- Probe ---
class ProbeConfig(BaseModel):
    """Weakly tunneling probe qubit used for tunneling spectroscopy."""

    model_config = ConfigDict(frozen=True)

    delta_p: float = Field(..., ge=0, description="Probe tunneling amplitude, GHz")
    j_p: float = Field(..., description="Probe coupling energy E*J_P, GHz")
    eps_p_grid: tuple[float, ...] = Field((), description="Probe bias sweep, GHz")
    attach_to: int = Field(0, ge=0, description="System qubit the probe couples to")
    linewidth: float = Field(DEFAULT_LINEWIDTH_GHZ, description="Line width w, GHz")
    lineshape: Literal["gaussian", "lorentzian"] = Field("gaussian")
    ratio: float = Field(
        DEFAULT_PROBE_RATIO, gt=0, description="Required min(Delta, |J_P|) / Delta_P"
    )

    @field_validator("linewidth")
    @classmethod
    def validate_linewidth(cls, v: float) -> float:
        if not v > 0:
            raise ValidationError(f"linewidth must be > 0, got {v}")
        return v

    @field_validator("j_p")
    @classmethod
    def validate_coupling(cls, v: float) -> float:
        if v == 0 or not np.isfinite(v):
            raise ValidationError("probe coupling j_p must be finite and nonzero")
        return v

    @field_validator("eps_p_grid")
    @classmethod
    def validate_grid(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not np.all(np.isfinite(v)):
            raise ValidationError("eps_p grid contains non-finite values")
        return v

    def check_weak(self, delta: float) -> None:
        """Assert Delta_P is small next to both Delta and |J_P|."""
        scale = min(delta, abs(self.j_p))
        if self.delta_p * self.ratio > scale:
            raise ProbeConstraintError(
                f"delta_p={self.delta_p} GHz is not {self.ratio:g}x below "
                f"min(delta={delta:.4g}, |j_p|={abs(self.j_p):.4g}) GHz",
                details={"delta_p": self.delta_p, "delta": delta, "j_p": self.j_p},
            )


# --- Operators ---
class HermitianOperator(BaseModel):
    """Dense Hermitian matrix in GHz on the computational basis."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    n_qubits: int
    has_probe: bool = False

    @model_validator(mode="after")
    def _check_matrix(self) -> "HermitianOperator":
        m = self.matrix
        dim = 2**self.n_qubits
        if m.ndim != 2 or m.shape != (dim, dim):
            raise ValidationError(
                f"operator shape {m.shape} does not match {self.n_qubits} qubits"
            )
        err = hermiticity_error(m)
        if err > HERMITICITY_TOL:
            raise ValidationError(f"operator is not Hermitian (max |H - H^+| = {err:.2e})")
        m.setflags(write=False)
        return self

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


@lru_cache(maxsize=MAX_COMPOSITE_QUBITS + 1)
def sigma_z_table(n: int) -> np.ndarray:
    """(2^n, n) table of sigma^z eigenvalues, row k = basis state k."""
    index = np.arange(2**n)[:, None]
    shifts = n - 1 - np.arange(n)[None, :]
    table = 1 - 2 * ((index >> shifts) & 1)
    table = table.astype(float)
    table.setflags(write=False)
    return table


def problem_diagonal(instance: ProblemInstance) -> np.ndarray:
    """Diagonal of H_P = -sum h_i s_i + sum J_ij s_i s_j over basis states."""
    spins = sigma_z_table(instance.n)
    diag = -spins @ np.asarray(instance.h, dtype=float)
    for i, j, value in instance.couplings:
        diag = diag + value * spins[:, i] * spins[:, j]
    return diag


def system_matrix(
    instance: ProblemInstance,
    delta: float,
    energy_scale: float,
    h_override: float | None = None,
) -> np.ndarray:
    """Dense H_S = E * H_P - (1/2) sum_i Delta_i sigma^x_i for explicit energies."""
    n = instance.n
    if n > MAX_QUBITS:
        raise CapacityError(n, MAX_QUBITS)
    if h_override is not None:
        instance = instance.with_uniform_bias(h_override)
    matrix = np.diag(energy_scale * problem_diagonal(instance))
    index = np.arange(2**n)
    for qubit, factor in enumerate(instance.multipliers):
        flipped = index ^ (1 << (n - 1 - qubit))
        matrix[index, flipped] -= 0.5 * delta * factor
    return matrix


def assemble_hamiltonian(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    h_override: float | None = None,
) -> HermitianOperator:
    """
    System Hamiltonian at anneal fraction s.

    Args:
        instance: Problem instance
        schedule: Supplies Delta(s) and E(s)
        s: Anneal fraction inside the schedule domain
        h_override: Uniform bias replacing every h_i

    Returns:
        2^n x 2^n Hermitian operator
    """
    delta, escale = schedule.at(s)
    return HermitianOperator(
        matrix=system_matrix(instance, delta, escale, h_override), n_qubits=instance.n
    )


def left_block_matrix(system: np.ndarray, n: int, probe: ProbeConfig) -> np.ndarray:
    """H_S - 2 J_P sigma^z_attach: the system seen with the probe down."""
    if probe.attach_to >= n:
        raise ProbeConstraintError(f"attach_to={probe.attach_to} out of range for n={n}")
    z = sigma_z_table(n)[:, probe.attach_to]
    return system - np.diag(2.0 * probe.j_p * z)


def assemble_probe_hamiltonian(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    probe: ProbeConfig,
    eps_p: float,
    h_override: float | None = None,
) -> HermitianOperator:
    """
    System plus probe Hamiltonian with the compensating bias applied.

    H = H_S - [J_P s^z_a - eps_P / 2](1 - s^z_P) - (Delta_P / 2) s^x_P. The
    probe-up block equals H_S; the probe-down block is H_S - 2 J_P s^z_a + eps_P.
    """
    if not np.isfinite(eps_p):
        raise ValidationError(f"eps_p must be finite, got {eps_p}")
    n = instance.n
    if n + 1 > MAX_COMPOSITE_QUBITS:
        raise CapacityError(n + 1, MAX_COMPOSITE_QUBITS)
    system = assemble_hamiltonian(instance, schedule, s, h_override).matrix
    left = left_block_matrix(system, n, probe) + eps_p * np.eye(system.shape[0])
    dim = system.shape[0]
    full = np.zeros((2 * dim, 2 * dim), dtype=system.dtype)
    full[:dim, :dim] = system
    full[dim:, dim:] = left
    coupling = -0.5 * probe.delta_p * np.eye(dim)
    full[:dim, dim:] = coupling
    full[dim:, :dim] = coupling
    return HermitianOperator(matrix=full, n_qubits=n + 1, has_probe=True)
