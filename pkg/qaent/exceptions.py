"""
Exception classes for the qaent library.

Every error carries an ``exit_code`` so the command-line surface can map it
straight to a process status: 2 for invalid input, 3 for numerical failure.
"""

from typing import Any

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class QaentError(Exception):
    """Base exception for qaent errors."""

    def __init__(
        self,
        message: str,
        error_code: str,
        exit_code: int = 1,
        details: Any | None = None,
    ):
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        self.details = details
        super().__init__(message)


class ValidationError(QaentError):
    """Raised when an input fails validation."""

    def __init__(
        self,
        message: str,
        details: Any | None = None,
        error_code: str = "validation_error",
    ):
        super().__init__(
            message=message,
            error_code=error_code,
            exit_code=EXIT_VALIDATION,
            details=details,
        )


class ScheduleParseError(ValidationError):
    """Raised when a schedule table row cannot be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(
            message=f"Schedule line {line}: {message}",
            details={"line": line},
            error_code="schedule_parse_error",
        )


class ScheduleDomainError(ValidationError):
    """Raised when a schedule is queried outside its tabulated range."""

    def __init__(self, s: float, s_min: float, s_max: float):
        super().__init__(
            message=f"s={s} outside schedule domain [{s_min}, {s_max}]",
            details={"s": s, "s_min": s_min, "s_max": s_max},
            error_code="schedule_domain_error",
        )


class InstanceError(ValidationError):
    """Raised when a problem instance is malformed."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__(
            message=f"Instance error: {message}",
            details=details,
            error_code="instance_error",
        )


class CapacityError(ValidationError):
    """Raised when a dense operator would exceed the supported size."""

    def __init__(self, n_qubits: int, limit: int):
        super().__init__(
            message=f"{n_qubits} qubits exceeds the dense limit of {limit}",
            details={"n_qubits": n_qubits, "limit": limit},
            error_code="capacity_error",
        )


class ProbeConstraintError(ValidationError):
    """Raised when the probe qubit is not weak compared to the system."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__(
            message=f"Probe constraint violated: {message}",
            details=details,
            error_code="probe_constraint_error",
        )


class PopulationError(ValidationError):
    """Raised when a tunneling probability cannot be turned into a population."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__(
            message=message, details=details, error_code="population_error"
        )


class UndefinedCutError(ValidationError):
    """Raised when no coupling crosses a bipartition."""

    def __init__(self, partition_id: int):
        super().__init__(
            message=f"No nonzero coupling crosses bipartition {partition_id}",
            details={"partition_id": partition_id},
            error_code="undefined_cut",
        )


class ConfigurationError(ValidationError):
    """Raised when configuration is invalid or missing."""

    def __init__(self, message: str):
        super().__init__(
            message=f"Configuration error: {message}",
            error_code="configuration_error",
        )


class NumericalError(QaentError):
    """Raised when a numerical procedure fails."""

    def __init__(
        self,
        message: str,
        details: Any | None = None,
        error_code: str = "numerical_error",
    ):
        super().__init__(
            message=message,
            error_code=error_code,
            exit_code=EXIT_NUMERICAL,
            details=details,
        )


class DegenerateGroundStateError(NumericalError):
    """Raised when the ground state is degenerate where uniqueness is required."""

    def __init__(self, gap: float, tolerance: float):
        super().__init__(
            message=f"Ground state is degenerate (gap {gap:.3e} GHz < {tolerance:.0e})",
            details={"gap": gap, "tolerance": tolerance},
            error_code="degenerate_ground_state",
        )


class NoWitnessError(NumericalError):
    """Raised when a state has a positive partial transpose across the cut."""

    def __init__(self, partition_id: int, min_eigenvalue: float):
        super().__init__(
            message=(
                f"State is PPT across bipartition {partition_id} "
                f"(min eigenvalue {min_eigenvalue:.3e}); no witness"
            ),
            details={"partition_id": partition_id, "min_eigenvalue": min_eigenvalue},
            error_code="no_witness",
        )


class FitError(NumericalError):
    """Raised when a peak fit does not converge."""

    def __init__(self, message: str, residual_norm: float | None = None):
        self.residual_norm = residual_norm
        super().__init__(
            message=f"Peak fit failed: {message}",
            details={"residual_norm": residual_norm},
            error_code="fit_error",
        )


class InfeasibleConstraintsError(NumericalError):
    """Raised when population constraints admit no density matrix."""

    def __init__(self, message: str, certificate: dict[str, Any]):
        self.certificate = certificate
        super().__init__(
            message=f"Infeasible constraints: {message}",
            details=certificate,
            error_code="infeasible_constraints",
        )


class SolverError(NumericalError):
    """Raised when the SDP iteration breaks down."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__(
            message=f"SDP solver error: {message}",
            details=details,
            error_code="solver_error",
        )
