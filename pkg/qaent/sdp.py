"""
Population-constrained bound on a witness expectation.

Solves

    maximize   Tr[W X]
    subject to X >= 0, Tr X = 1,
               lower_k <= <u_k|X|u_k> <= upper_k

for a handful of orthonormal vectors u_k through its dual

    minimize   -b.y
    subject to C - sum_i y_i A_i >= 0

with C = -W, each A_i the identity or a projector |u_k><u_k|, and the sign
of y_i fixed by the kind of row.

Small operators go to cvxpy as a single LMI. Larger ones with at most two
constrained vectors use a Schur complement onto span(u): with t = -y_0 and
a_k the net weight on u_k, the LMI is equivalent to S(t) - diag(a) >= 0 for
a K x K matrix S(t), the best a has a closed form, and t is found by a
bounded scalar minimization. Either way the dual point is projected back
onto the feasible set in numpy, so the returned bound is a valid upper bound
whatever accuracy the solver reached.
"""

from collections.abc import Callable, Sequence
from typing import Any, Literal

import cvxpy as cp
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
import scipy.linalg
import scipy.optimize

from .constants import SDP_DENSE_MAX_DIM, SDP_GAP_TARGET, SDP_MAX_ITER, SDP_TOLERANCE
from .exceptions import SolverError, ValidationError
from .utils import hermitize, logger

# constraints closer than this are treated as equalities or as pinning a face
_FACE_TOL = 1e-12
_ORTHONORMAL_TOL = 1e-8
_BRACKET_DOUBLINGS = 60

Face = Literal["pinned", "reduced", "full"]
Method = Literal["auto", "cvxpy", "schur"]


class SdpResult(BaseModel):
    """Outcome of one bound computation."""

    model_config = ConfigDict(frozen=True)

    upper_bound: float = Field(..., description="Dual objective, a certified upper bound")
    primal_value: float = Field(
        ..., description="Tr[W X] at the solver's primal point; nan without one"
    )
    duality_gap: float = Field(..., description="upper_bound - primal_value")
    status: Literal["optimal", "infeasible", "max-iter"]
    iterations: int = 0
    dual_certificate: dict[str, Any] = Field(default_factory=dict)

    @property
    def certified(self) -> bool:
        """True when the bound proves Tr[W rho] < 0 for every consistent rho."""
        return self.status != "infeasible" and self.upper_bound < 0


class _DualForm:
    """
    Rows of the constraint map. ``kinds[i]`` is -1 for the trace row or the
    column of u for a projector row; ``signs[i]`` is +1 where y_i <= 0, -1
    where y_i >= 0 and 0 for equalities. ``lo`` and ``hi`` are the clipped
    population bounds per column of u.
    """

    def __init__(
        self,
        w: np.ndarray,
        u: np.ndarray,
        lo: np.ndarray,
        hi: np.ndarray,
        kinds: list[int],
        b: list[float],
        signs: list[float],
        face: Face,
    ):
        self.c = -w
        self.u = u
        self.lo = lo
        self.hi = hi
        self.kinds = np.asarray(kinds, dtype=int)
        self.b = np.asarray(b, dtype=float)
        self.signs = np.asarray(signs, dtype=float)
        self.face = face
        self.dim = w.shape[0]

    @property
    def m(self) -> int:
        return int(self.kinds.size)

    @property
    def columns(self) -> np.ndarray:
        """Columns of u that carry at least one row."""
        return np.unique(self.kinds[self.kinds >= 0])

    def row_matrix(self, i: int) -> np.ndarray:
        k = self.kinds[i]
        if k < 0:
            return np.eye(self.dim, dtype=self.c.dtype)
        return np.outer(self.u[:, k], self.u[:, k].conj())

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """A*(y) = sum_i y_i A_i."""
        out = np.zeros_like(self.c)
        for i in range(self.m):
            out = out + y[i] * self.row_matrix(i)
        return out

    @property
    def shift(self) -> np.ndarray:
        """Direction with A*(shift) = identity on the face."""
        if self.face == "pinned":
            return np.ones(self.m)
        return (self.kinds < 0).astype(float)

    @property
    def reducible(self) -> bool:
        """Whether the Schur reduction onto span(u) applies."""
        k = self.columns.size
        return self.face != "pinned" and 1 <= k <= 2 and self.dim > k


def _solver_options(solver: str, tol: float, max_iter: int) -> dict[str, Any]:
    if solver == cp.CLARABEL:
        return {"tol_gap_abs": tol, "tol_gap_rel": tol, "tol_feas": tol, "max_iter": max_iter}
    return {"eps_abs": tol, "eps_rel": tol, "max_iters": 50 * max_iter}


def _preferred_solver() -> str:
    return cp.CLARABEL if cp.CLARABEL in cp.installed_solvers() else cp.SCS


def _solve_cvxpy(
    form: _DualForm, tol: float, max_iter: int
) -> tuple[np.ndarray, np.ndarray | None, bool, int]:
    """Dual as one LMI in y; returns (y, primal X or None, converged, iterations)."""
    y = cp.Variable(form.m)
    slack = form.c - sum(y[i] * form.row_matrix(i) for i in range(form.m))
    lmi = (slack + slack.H) / 2 >> 0
    constraints = [lmi]
    if np.any(form.signs < 0):
        constraints.append(y[np.nonzero(form.signs < 0)[0]] >= 0)
    if np.any(form.signs > 0):
        constraints.append(y[np.nonzero(form.signs > 0)[0]] <= 0)
    problem = cp.Problem(cp.Minimize(-form.b @ y), constraints)

    solver = _preferred_solver()
    try:
        problem.solve(solver=solver, **_solver_options(solver, tol, max_iter))
    except cp.SolverError as e:
        logger.debug(f"{solver} failed on the witness bound: {e}")
        return np.zeros(form.m), None, False, 0

    iterations = int(problem.solver_stats.num_iters or 0)
    converged = problem.status == cp.OPTIMAL
    if y.value is None:
        logger.debug(f"{solver} returned no dual point (status {problem.status})")
        return np.zeros(form.m), None, False, iterations
    x = None if lmi.dual_value is None else hermitize(np.asarray(lmi.dual_value))
    return np.asarray(y.value, dtype=float), x, converged, iterations


def _penalty(a: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    """Cheapest -(lo y_lo + hi y_hi) over splits a = y_lo + y_hi, y_lo >= 0 >= y_hi."""
    return float(np.sum(np.maximum(-lo * a, -hi * a)))


def _cheapest_weights(s_mat: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """
    Weights a minimizing the penalty subject to diag(a) <= S, for one or two
    vectors. The penalty never increases with a, so the optimum sits on the
    boundary; for two vectors that is (S11 - a1)(S22 - a2) = |S12|^2, and the
    minimum lies at a piecewise stationary point or a kink.
    """
    diag = np.real(np.diag(s_mat)).astype(float)
    if diag.size == 1:
        return diag
    r = float(abs(s_mat[0, 1]) ** 2)
    if r <= 0.0:
        return diag
    candidates = [
        np.sqrt(s2 * r / s1) for s1 in (lo[0], hi[0]) if s1 > 0 for s2 in (lo[1], hi[1])
    ]
    if diag[0] > 0:
        candidates.append(diag[0])
    if diag[1] > 0:
        candidates.append(r / diag[1])
    best: tuple[float, np.ndarray] | None = None
    for x in candidates:
        if not x > 0:
            continue
        a = np.array([diag[0] - x, diag[1] - r / x])
        cost = _penalty(a, lo, hi)
        if best is None or cost < best[0]:
            best = (cost, a)
    if best is None:
        raise SolverError("no boundary point for the reduced population constraint")
    return best[1]


def _solve_schur(
    form: _DualForm, tol: float, max_iter: int
) -> tuple[np.ndarray, np.ndarray | None, bool, int]:
    """Dual through the Schur complement onto span(u); no primal point."""
    cols = form.columns
    u = form.u[:, cols]
    lo, hi = form.lo[cols], form.hi[cols]
    w = -form.c
    k = cols.size

    complement = scipy.linalg.null_space(u.conj().T)
    omega, vectors = scipy.linalg.eigh(hermitize(complement.conj().T @ w @ complement))
    w11 = hermitize(u.conj().T @ w @ u)
    coupling = u.conj().T @ w @ complement @ vectors

    def schur(t: float) -> np.ndarray:
        return t * np.eye(k) - w11 - (coupling / (t - omega)) @ coupling.conj().T

    def objective(t: float) -> float:
        return t + _penalty(_cheapest_weights(schur(t), lo, hi), lo, hi)

    scale = 1.0 + float(np.linalg.norm(w))
    t_lo = float(omega[-1]) + _FACE_TOL * scale
    t_hi = float(omega[-1]) + 2 * scale
    for _ in range(_BRACKET_DOUBLINGS):
        if objective(t_hi) >= objective(0.5 * (t_lo + t_hi)):
            break
        t_hi = t_lo + 2 * (t_hi - t_lo)

    result = scipy.optimize.minimize_scalar(
        objective,
        bounds=(t_lo, t_hi),
        method="bounded",
        options={"xatol": tol * scale, "maxiter": max_iter},
    )
    t = float(result.x)
    a = _cheapest_weights(schur(t), lo, hi)
    weight = dict(zip(cols.tolist(), a.tolist(), strict=True))

    y = np.zeros(form.m)
    for i, (kind, sign) in enumerate(zip(form.kinds, form.signs, strict=True)):
        if kind < 0:
            y[i] = -t
        elif sign < 0:
            y[i] = max(weight[int(kind)], 0.0)
        elif sign > 0:
            y[i] = min(weight[int(kind)], 0.0)
        else:
            y[i] = weight[int(kind)]
    return y, None, bool(result.success), int(result.nfev)


def _certify(form: _DualForm, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Project y onto the dual-feasible set; returns (y, min slack eigenvalue)."""
    y = y.copy()
    y[form.signs < 0] = np.maximum(y[form.signs < 0], 0.0)
    y[form.signs > 0] = np.minimum(y[form.signs > 0], 0.0)
    lowest = float(scipy.linalg.eigvalsh(hermitize(form.c - form.adjoint(y)))[0])
    if lowest < 0:
        y = y + lowest * form.shift
    return y, max(lowest, 0.0)


def _infeasibility(
    lower: np.ndarray, upper: np.ndarray, dim: int, tol: float
) -> dict[str, Any] | None:
    crossed = np.nonzero(lower > upper + tol)[0]
    if crossed.size:
        k = int(crossed[0])
        return {
            "reason": "lower bound exceeds upper bound",
            "constraint": k,
            "lower": float(lower[k]),
            "upper": float(upper[k]),
        }
    if lower.sum() > 1 + tol:
        # y = (-1, 1, ..., 1) separates: sum_k <u_k|X|u_k> <= Tr X = 1 < sum lower
        return {"reason": "lower bounds sum above one", "sum_lower": float(lower.sum())}
    if lower.size == dim and upper.sum() < 1 - tol:
        return {"reason": "upper bounds sum below one", "sum_upper": float(upper.sum())}
    return None


def _dual_form(w: np.ndarray, v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> _DualForm:
    """
    Restrict to the face the bounds pin, then lay out the rows. Off the pinned
    face every open interval gets both a lower and an upper row, redundant
    ones included, so any net weight on u_k splits into a feasible y.
    """
    face: Face
    if lo.sum() >= 1 - _FACE_TOL:
        face = "pinned"
        basis = v[:, lo > _FACE_TOL]
    elif np.any(hi <= _FACE_TOL):
        face = "reduced"
        basis = scipy.linalg.null_space(v[:, hi <= _FACE_TOL].conj().T).astype(w.dtype)
    else:
        face = "full"
        basis = None
    if basis is not None:
        w = hermitize(basis.conj().T @ w @ basis)
        v = basis.conj().T @ v

    kinds: list[int] = []
    b: list[float] = []
    signs: list[float] = []
    if face != "pinned":
        kinds.append(-1)
        b.append(1.0)
        signs.append(0.0)
    for k in range(v.shape[1]):
        if np.linalg.norm(v[:, k]) < _FACE_TOL:
            continue
        if face == "pinned" or hi[k] - lo[k] <= _FACE_TOL:
            kinds.append(k)
            b.append(float(lo[k]))
            signs.append(0.0)
            continue
        kinds += [k, k]
        b += [float(lo[k]), float(hi[k])]
        signs += [-1.0, 1.0]
    return _DualForm(w, v, lo, hi, kinds, b, signs, face)


def maximize_expectation(
    w: np.ndarray,
    vectors: np.ndarray | Sequence[np.ndarray],
    lower: Sequence[float] | np.ndarray,
    upper: Sequence[float] | np.ndarray,
    tol: float = SDP_TOLERANCE,
    max_iter: int = SDP_MAX_ITER,
    method: Method = "auto",
) -> SdpResult:
    """
    Certified upper bound of Tr[W rho] over density matrices with bounded
    populations on orthonormal vectors.

    Lower bounds are clipped at 0 and upper bounds at 1. Constraints that pin
    rho to a face (populations summing to one, or an upper bound of zero) are
    removed by restricting the problem to that face first.

    Args:
        w: Hermitian operator to maximize
        vectors: Orthonormal vectors u_k, as columns or a sequence
        lower: Lower population bounds
        upper: Upper population bounds
        tol: Solver tolerance on gap and infeasibilities
        max_iter: Solver iteration cap
        method: "cvxpy" for the dense LMI, "schur" for the reduction onto
            span(u) (one or two vectors), "auto" for the LMI up to
            SDP_DENSE_MAX_DIM and the reduction beyond it where it applies

    Returns:
        SdpResult; status "infeasible" carries the violated condition instead
        of a bound

    Raises:
        ValidationError: Shapes disagree, the vectors are not orthonormal or
            "schur" was requested where it does not apply
        SolverError: The certified bound is not finite
    """
    w = np.asarray(w)
    v = np.column_stack(list(vectors)) if not isinstance(vectors, np.ndarray) else vectors
    if v.ndim == 1:
        v = v[:, None]
    d = w.shape[0]
    if w.shape != (d, d) or v.shape[0] != d:
        raise ValidationError(f"operator {w.shape} and vectors {v.shape} do not match")
    lo = np.clip(np.asarray(lower, dtype=float), 0.0, None)
    hi = np.clip(np.asarray(upper, dtype=float), None, 1.0)
    k_count = v.shape[1]
    if lo.shape != (k_count,) or hi.shape != (k_count,):
        raise ValidationError(f"need {k_count} lower and upper bounds")
    if np.max(np.abs(v.conj().T @ v - np.eye(k_count))) > _ORTHONORMAL_TOL:
        raise ValidationError("constraint vectors must be orthonormal")

    dtype = np.result_type(w, v, float)
    w = hermitize(w.astype(dtype))
    v = v.astype(dtype)

    reason = _infeasibility(lo, hi, d, tol)
    if reason is not None:
        logger.debug(f"Population constraints infeasible: {reason['reason']}")
        return SdpResult(
            upper_bound=float("nan"),
            primal_value=float("nan"),
            duality_gap=float("nan"),
            status="infeasible",
            dual_certificate=reason,
        )

    form = _dual_form(w, v, lo, hi)
    if method == "schur" and not form.reducible:
        raise ValidationError(
            "the Schur reduction needs one or two constrained vectors off a pinned face"
        )
    use_schur = method == "schur" or (
        method == "auto" and form.dim > SDP_DENSE_MAX_DIM and form.reducible
    )
    solve: Callable[..., tuple[np.ndarray, np.ndarray | None, bool, int]] = (
        _solve_schur if use_schur else _solve_cvxpy
    )
    y, x, converged, iterations = solve(form, tol, max_iter)
    raw = float(-form.b @ y)
    y_cert, min_slack = _certify(form, y)
    bound = float(-form.b @ y_cert)
    if not np.isfinite(bound):
        raise SolverError("dual certificate is not finite", details={"face": form.face})
    primal = float("nan") if x is None else float(np.real(np.vdot(-form.c, x)))
    gap = bound - primal
    # without a primal point, tightness is judged by how far projection moved the dual
    correction = bound - raw
    tight = abs(gap) <= SDP_GAP_TARGET if x is not None else abs(correction) <= SDP_GAP_TARGET
    status: Literal["optimal", "max-iter"] = "optimal" if converged and tight else "max-iter"
    if status == "max-iter":
        if x is None:
            logger.warning(
                f"SDP returned no primal point after {iterations} iterations; "
                f"certified bound {bound:.6g} is {correction:.3e} above the solver's dual"
            )
        else:
            logger.warning(
                f"SDP stopped after {iterations} iterations with gap {gap:.3e}; "
                f"bound {bound:.6g} is valid but may be loose"
            )
    return SdpResult(
        upper_bound=bound,
        primal_value=primal,
        duality_gap=gap,
        status=status,
        iterations=iterations,
        dual_certificate={
            "face": form.face,
            "method": "schur" if use_schur else "cvxpy",
            "y": y_cert.tolist(),
            "b": form.b.tolist(),
            "min_slack_eigenvalue": min_slack,
            "projection_shift": correction,
        },
    )
