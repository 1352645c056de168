"""
Qubit tunneling spectroscopy: probe rate spectra, Gaussian peak fits and
equilibrium population extraction.

The probe starts in its down state next to the system ground state of the
left block H_S - 2 J_P sigma^z_a. Its tunneling rate as a function of the
probe bias eps_P peaks wherever the left ground state is resonant with a
system eigenstate |n> in the probe-up block. Only the fixed points of the
protocol are modelled: initial rates and long-dwell equilibrium.
"""

from collections.abc import Sequence
from typing import Literal
import warnings

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import find_peaks
from scipy.special import softmax

from .constants import GAMMA0_PER_US_AT_1MHZ, PROBE_THERMAL_RATIO
from .exceptions import FitError, PopulationError, ProbeConstraintError, ValidationError
from .model import (
    AnnealSchedule,
    ProbeConfig,
    ProblemInstance,
    assemble_hamiltonian,
    left_block_matrix,
)
from .spectra import Spectrum, eigendecompose
from .thermal import Temperature
from .utils import as_grid, logger, parallel_map

_POPULATION_SUM_TOL = 1e-6
_MIN_SAMPLES_PER_WIDTH = 5
_PEAK_PROMINENCE = 1e-3
_DEGENERATE_GHZ = 1e-9
_AUTO_LEVELS = 4
_AUTO_MARGIN = 4.0
_AUTO_POINTS_PER_WIDTH = 10


def gamma0(delta_p: float) -> float:
    """Rate prefactor in 1/us: 1/us at Delta_P = 1 MHz, scaling as Delta_P^2."""
    return GAMMA0_PER_US_AT_1MHZ * (delta_p * 1e3) ** 2


def lineshape(
    x: np.ndarray, width: float, kind: Literal["gaussian", "lorentzian"] = "gaussian"
) -> np.ndarray:
    """Unit-area profile: Gaussian with std ``width`` or Lorentzian with HWHM ``width``."""
    if kind == "lorentzian":
        return stats.cauchy.pdf(x, scale=width)
    return stats.norm.pdf(x, scale=width)


class RateSpectrum(BaseModel):
    """Probe tunneling rate against probe bias."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    eps_p: np.ndarray = Field(..., description="Probe bias grid, GHz")
    gamma_raw: np.ndarray = Field(..., description="Rate in 1/us")
    components: np.ndarray = Field(..., description="|<psi_0^L|n>|^2 per eigenstate")
    centers: np.ndarray = Field(..., description="Resonances E_n - E_0^L, GHz")
    gamma0: float
    linewidth: float
    lineshape: str = "gaussian"

    @property
    def gamma(self) -> np.ndarray:
        """Rate normalized to its maximum on the grid."""
        peak = float(np.max(self.gamma_raw))
        return self.gamma_raw / peak if peak > 0 else np.zeros_like(self.gamma_raw)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "eps_p_ghz": self.eps_p,
                "gamma_norm": self.gamma,
                "gamma_raw_per_us": self.gamma_raw,
            }
        )


def _left_ground(system: np.ndarray, n: int, probe: ProbeConfig) -> Spectrum:
    return eigendecompose(left_block_matrix(system, n, probe))


def auto_eps_grid(centers: np.ndarray, linewidth: float) -> np.ndarray:
    """
    Probe-bias grid spanning the lowest resonances with a margin of four
    line widths and ten points per width.

    ``centers`` holds ascending resonances per row, one row per spectrum.
    """
    rows = np.atleast_2d(centers)
    top = min(_AUTO_LEVELS, rows.shape[1]) - 1
    lo = float(np.min(rows[:, 0])) - _AUTO_MARGIN * linewidth
    hi = float(np.max(rows[:, top])) + _AUTO_MARGIN * linewidth
    count = int(np.ceil((hi - lo) / (linewidth / _AUTO_POINTS_PER_WIDTH))) + 1
    return np.linspace(lo, hi, count)


def _resolve_grid(
    eps_grid: Sequence[float] | np.ndarray | None,
    probe: ProbeConfig,
    centers: np.ndarray,
) -> np.ndarray:
    if eps_grid is not None:
        return as_grid(eps_grid)
    if probe.eps_p_grid:
        return as_grid(probe.eps_p_grid)
    return auto_eps_grid(centers, probe.linewidth)


def _resonances(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    h_uniform: float | None,
    probe: ProbeConfig,
) -> np.ndarray:
    system = assemble_hamiltonian(instance, schedule, s, h_uniform).matrix
    left = _left_ground(system, instance.n, probe)
    return eigendecompose(system).energies - left.energies[0]


def _check_probe(
    probe: ProbeConfig, delta: float, temperature: Temperature | None
) -> None:
    probe.check_weak(delta)
    if temperature is not None and abs(probe.j_p) < PROBE_THERMAL_RATIO * temperature.as_ghz:
        logger.warning(
            f"|j_p|={abs(probe.j_p):.3g} GHz is not well above k_B T="
            f"{temperature.as_ghz:.3g} GHz; the probe may be thermally excited"
        )


def simulate_rate_spectrum(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    h_uniform: float | None,
    probe: ProbeConfig,
    eps_grid: Sequence[float] | np.ndarray | None = None,
    temperature: Temperature | None = None,
) -> RateSpectrum:
    """
    Gamma(eps_P) = Gamma_0 * sum_n |<psi_0^L|n>|^2 G(eps_P - (E_n - E_0^L); w).

    Args:
        instance: Problem instance
        schedule: Anneal schedule
        s: Anneal fraction
        h_uniform: Uniform bias on every qubit, or None for the instance biases
        probe: Probe settings (grid taken from ``probe.eps_p_grid`` by default)
        eps_grid: Explicit probe-bias grid; when neither this nor the probe
            carries one, a grid covering the lowest resonances is built
        temperature: Used only for the |J_P| >> k_B T warning

    Returns:
        Raw and normalized rate spectrum

    Raises:
        ProbeConstraintError: Probe not weak against Delta(s) or |J_P|
    """
    delta, _ = schedule.at(s)
    _check_probe(probe, delta, temperature)

    system = assemble_hamiltonian(instance, schedule, s, h_uniform).matrix
    spec = eigendecompose(system)
    left = _left_ground(system, instance.n, probe)
    psi0 = left.state(0)
    weights = np.abs(spec.states.conj().T @ psi0) ** 2
    centers = spec.energies - left.energies[0]
    grid = _resolve_grid(eps_grid, probe, centers)

    g0 = gamma0(probe.delta_p)
    profile = lineshape(grid[:, None] - centers[None, :], probe.linewidth, probe.lineshape)
    return RateSpectrum(
        eps_p=grid,
        gamma_raw=g0 * (profile @ weights),
        components=weights,
        centers=centers,
        gamma0=g0,
        linewidth=probe.linewidth,
        lineshape=probe.lineshape,
    )


class QtsMap(BaseModel):
    """Normalized rate over (axis value, eps_P); each column peaks at one."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axis: Literal["s", "h"]
    grid: np.ndarray
    eps_p: np.ndarray
    gamma_norm: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        axis_values, eps = np.meshgrid(self.grid, self.eps_p, indexing="ij")
        return pd.DataFrame(
            {
                "axis_value": axis_values.ravel(),
                "eps_p_ghz": eps.ravel(),
                "gamma_norm": self.gamma_norm.ravel(),
            }
        )


def simulate_qts_map(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    axis: Literal["s", "h"],
    grid: Sequence[float] | np.ndarray,
    probe: ProbeConfig,
    fixed_s: float | None = None,
    eps_grid: Sequence[float] | np.ndarray | None = None,
    workers: int = 1,
) -> QtsMap:
    """
    False-color spectroscopy map along s (h fixed by the instance) or h (s fixed).

    Columns where the probe is not weak against Delta(s) are left as NaN.
    """
    axis_grid = as_grid(grid)
    if axis == "h" and fixed_s is None:
        raise ValidationError("an h-axis map needs a fixed s")
    s_fixed = float(fixed_s) if fixed_s is not None else 0.0

    def point(value: float) -> tuple[float, float | None]:
        return (value, None) if axis == "s" else (s_fixed, value)

    if eps_grid is None and not probe.eps_p_grid:
        centers = parallel_map(
            lambda v: _resonances(instance, schedule, *point(float(v)), probe),
            axis_grid,
            workers,
        )
        eps = auto_eps_grid(np.vstack(centers), probe.linewidth)
    else:
        eps = _resolve_grid(eps_grid, probe, np.zeros(1))

    def column(value: float) -> np.ndarray:
        s, h = point(value)
        try:
            return simulate_rate_spectrum(instance, schedule, s, h, probe, eps).gamma
        except ProbeConstraintError as e:
            logger.warning(f"No QTS column at {axis}={value:.4g}: {e.message}")
            return np.full(eps.size, np.nan)

    columns = parallel_map(lambda v: column(float(v)), axis_grid, workers)
    return QtsMap(axis=axis, grid=axis_grid, eps_p=eps, gamma_norm=np.vstack(columns))


class PeakFit(BaseModel):
    """Multi-Gaussian fit of a rate spectrum, peaks ordered by centroid."""

    model_config = ConfigDict(frozen=True)

    centroids: tuple[float, ...]
    centroid_errors: tuple[float, ...]
    widths: tuple[float, ...]
    amplitudes: tuple[float, ...]
    unresolved: bool = False
    converged: bool = True
    residual_norm: float = 0.0

    @property
    def gap(self) -> float | None:
        if len(self.centroids) < 2:
            return None
        return self.centroids[1] - self.centroids[0]

    @property
    def gap_error(self) -> float | None:
        if len(self.centroids) < 2:
            return None
        return float(np.hypot(self.centroid_errors[0], self.centroid_errors[1]))


def _gaussians(x: np.ndarray, *params: float) -> np.ndarray:
    out = np.zeros_like(x)
    for amp, mu, sigma in zip(params[0::3], params[1::3], params[2::3]):
        out += amp * np.exp(-0.5 * ((x - mu) / sigma) ** 2)
    return out


def _seed_positions(
    x: np.ndarray, y: np.ndarray, peaks: np.ndarray, count: int, width: float
) -> list[float]:
    seeds = [float(x[p]) for p in peaks[:count]]
    if len(seeds) < count:
        if peaks.size:
            anchor = float(x[peaks[np.argmax(y[peaks])]])
        else:
            anchor = float(x[np.argmax(y)])
        k = 0
        while len(seeds) < count:
            k += 1
            sign = 1 if k % 2 else -1
            seeds.append(anchor + sign * 0.5 * width * ((k + 1) // 2))
        seeds.sort()
    return seeds


def fit_peaks(
    spectrum: RateSpectrum, expected_count: int, linewidth: float | None = None
) -> PeakFit:
    """
    Fit the lowest ``expected_count`` peaks with a sum of Gaussians.

    The fit window runs from the start of the grid to halfway between the
    last fitted peak and the next detected one, so higher resonances do not
    pull the centroids. Peaks closer than the line width, or fewer detected
    maxima than expected, set ``unresolved``.

    Args:
        spectrum: Rate spectrum (normalized rates are fitted)
        expected_count: Number of Gaussians
        linewidth: Expected width; defaults to the spectrum's line width

    Returns:
        Centroids with covariance-based uncertainties

    Raises:
        ValidationError: Bad count or a grid too coarse for the width
        FitError: Least squares did not converge on resolved peaks
    """
    if expected_count < 1:
        raise ValidationError(f"expected_count must be >= 1, got {expected_count}")
    width = spectrum.linewidth if linewidth is None else linewidth
    x, y = spectrum.eps_p, spectrum.gamma
    if x.size < 3 * expected_count + 1:
        raise ValidationError("too few grid points for the requested fit")
    step = float(np.max(np.diff(x)))
    if step > width / _MIN_SAMPLES_PER_WIDTH:
        raise ValidationError(
            f"grid step {step:.3g} GHz does not resolve width {width:.3g} GHz "
            f"({_MIN_SAMPLES_PER_WIDTH} samples per width needed)"
        )

    peaks, _ = find_peaks(y, prominence=_PEAK_PROMINENCE)
    detected = int(peaks.size)
    mask = np.ones_like(x, dtype=bool)
    if detected > expected_count:
        cut = 0.5 * (x[peaks[expected_count - 1]] + x[peaks[expected_count]])
        mask = x <= cut
    xw, yw = x[mask], y[mask]

    seeds = _seed_positions(x, y, peaks, expected_count, width)
    p0: list[float] = []
    lower: list[float] = []
    upper: list[float] = []
    for mu in seeds:
        amp = float(np.interp(mu, x, y)) or 0.5
        p0 += [amp, mu, width]
        lower += [0.0, float(x[0]), step / 2]
        upper += [np.inf, float(x[-1]), 10 * width]

    too_few = detected < expected_count
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, pcov = curve_fit(
                _gaussians, xw, yw, p0=p0, bounds=(lower, upper), maxfev=20000
            )
    except (RuntimeError, ValueError) as e:
        residual = float(np.linalg.norm(_gaussians(xw, *p0) - yw))
        if not too_few:
            raise FitError(str(e), residual_norm=residual) from e
        logger.warning(f"Unresolved peaks: fit did not converge ({e})")
        return PeakFit(
            centroids=tuple(seeds),
            centroid_errors=(float("nan"),) * expected_count,
            widths=(width,) * expected_count,
            amplitudes=tuple(p0[0::3]),
            unresolved=True,
            converged=False,
            residual_norm=residual,
        )

    errors = np.sqrt(np.clip(np.diag(pcov), 0, None))
    order = np.argsort(popt[1::3])
    amps = popt[0::3][order]
    mus = popt[1::3][order]
    sigmas = np.abs(popt[2::3][order])
    mu_err = np.where(np.isfinite(errors[1::3]), errors[1::3], np.nan)[order]
    residual = float(np.linalg.norm(_gaussians(xw, *popt) - yw))

    unresolved = too_few
    if expected_count > 1:
        separation = float(np.min(np.diff(mus)))
        unresolved = unresolved or separation < width
    if unresolved:
        logger.warning(
            f"Peaks unresolved: {detected} maxima for {expected_count} expected, "
            f"line width {width:.3g} GHz"
        )
    return PeakFit(
        centroids=tuple(float(v) for v in mus),
        centroid_errors=tuple(float(v) for v in mu_err),
        widths=tuple(float(v) for v in sigmas),
        amplitudes=tuple(float(v) for v in amps),
        unresolved=unresolved,
        residual_norm=residual,
    )


def fit_gap(spectrum: RateSpectrum) -> PeakFit:
    """Two-peak fit; ``gap`` and ``gap_error`` give g and its uncertainty."""
    return fit_peaks(spectrum, 2)


class PopulationEstimate(BaseModel):
    """Level populations recovered from probe tunneling probabilities."""

    model_config = ConfigDict(frozen=True)

    energies: tuple[float, ...] = Field(..., description="Aligned level energies, GHz")
    p: tuple[float, ...] = Field(..., description="Recovered populations P_n")
    pl_raw: tuple[float, ...] = Field(..., description="Tunneling probabilities P^L")
    conservation_residual: float = Field(
        0.0, description="max |P^L + sum P^R - 1| over the aligned levels"
    )

    @model_validator(mode="after")
    def _check_total(self) -> "PopulationEstimate":
        if any(v < 0 for v in self.p):
            raise PopulationError("recovered populations must be >= 0")
        total = sum(self.p)
        if total > 1 + _POPULATION_SUM_TOL:
            raise PopulationError(
                f"recovered populations sum to {total:.6g} > 1",
                details={"p": list(self.p)},
            )
        return self


def estimate_populations(pl_values: Sequence[tuple[float, float]]) -> PopulationEstimate:
    """
    P_n = P^L / (1 - P^L) for each aligned level.

    Args:
        pl_values: (E_n, P^L) pairs

    Returns:
        Population estimate

    Raises:
        ValidationError: P^L outside [0, 1]
        PopulationError: P^L = 1 (the probe never tunneled)
    """
    energies, p, pl = [], [], []
    for energy, value in pl_values:
        value = float(value)
        if not 0 <= value <= 1:
            raise ValidationError(f"P^L must be in [0, 1], got {value}")
        if value == 1:
            raise PopulationError(
                f"P^L = 1 at E={energy}: probe never tunneled, population undefined"
            )
        energies.append(float(energy))
        pl.append(value)
        p.append(value / (1 - value))
    return PopulationEstimate(energies=tuple(energies), p=tuple(p), pl_raw=tuple(pl))


def _equilibrium(energies: np.ndarray, kT: float | None) -> np.ndarray:
    shifted = energies - energies.min()
    if kT is None:
        ground = shifted <= _DEGENERATE_GHZ
        return ground / ground.sum()
    return softmax(-shifted / kT)


def simulate_population_protocol(
    instance: ProblemInstance,
    schedule: AnnealSchedule,
    s: float,
    T: Temperature | None,
    probe: ProbeConfig,
    levels: int = 2,
    h_uniform: float | None = None,
) -> PopulationEstimate:
    """
    Simulate the long-dwell probe measurement at each of the lowest levels.

    For level n the probe bias is set to eps_P = E_n - E_0^L so the prepared
    state |psi_0^L, down> is degenerate with |n, up>. The composite system
    equilibrates over that single left state and the full right manifold,
    degenerate states sharing population equally, and P^L is read off.

    Args:
        instance: Problem instance
        schedule: Anneal schedule
        s: Anneal fraction
        T: Temperature, or None for the T -> 0 limit
        probe: Probe settings
        levels: Number of lowest levels to probe
        h_uniform: Optional uniform bias

    Returns:
        Recovered populations with the conservation residual
    """
    delta, _ = schedule.at(s)
    _check_probe(probe, delta, T)
    system = assemble_hamiltonian(instance, schedule, s, h_uniform).matrix
    spec = eigendecompose(system)
    e0_left = _left_ground(system, instance.n, probe).energies[0]
    kT = None if T is None else T.as_ghz
    if levels < 1 or levels > spec.dim:
        raise ValidationError(f"levels must be in [1, {spec.dim}], got {levels}")

    pl_values = []
    residual = 0.0
    for n in range(levels):
        eps_p = spec.energies[n] - e0_left
        weights = _equilibrium(np.concatenate([[e0_left + eps_p], spec.energies]), kT)
        p_left, p_right = weights[0], weights[1:]
        residual = max(residual, abs(p_left + p_right.sum() - 1.0))
        pl_values.append((float(spec.energies[n]), float(p_left)))

    estimate = estimate_populations(pl_values)
    logger.debug(
        f"Population protocol at s={s}: P={[round(v, 6) for v in estimate.p]}, "
        f"conservation residual {residual:.1e}"
    )
    return estimate.model_copy(update={"conservation_residual": float(residual)})
