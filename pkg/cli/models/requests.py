"""
Run configuration models, one per subcommand.
"""

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from qaent.constants import (
    DEFAULT_LINEWIDTH_GHZ,
    DEFAULT_PROBE_RATIO,
    DEFAULT_TEMPERATURE_MK,
    DELTA_FRACTIONAL_ERROR,
    ESCALE_FRACTIONAL_ERROR,
    SDP_MAX_ITER,
    SDP_TOLERANCE,
)
from qaent.exceptions import ValidationError
from qaent.model import ProbeConfig

from .common import Grid, parse_grid

__all__ = [
    "MeasuresConfig",
    "PopulationsConfig",
    "ProbeOptions",
    "QtsConfig",
    "RobustnessConfig",
    "RunConfig",
    "SpectrumConfig",
    "WitnessConfig",
]

DEFAULT_S_GRID = "0.2:0.5:31"


class ProbeOptions(BaseModel):
    """Probe qubit settings for spectroscopy runs."""

    delta_p: float = Field(0.001, ge=0, description="Probe tunneling amplitude, GHz")
    j_p: float = Field(-2.0, description="Probe coupling energy, GHz")
    linewidth: float = Field(DEFAULT_LINEWIDTH_GHZ, gt=0, description="Line width, GHz")
    lineshape: Literal["gaussian", "lorentzian"] = "gaussian"
    ratio: float = Field(DEFAULT_PROBE_RATIO, gt=0, description="Weak-probe ratio")
    attach_to: int = Field(0, ge=0, description="System qubit the probe couples to")
    eps_grid: tuple[float, ...] | None = Field(
        None, description="Probe bias grid, GHz; automatic when omitted"
    )

    @field_validator("eps_grid", mode="before")
    @classmethod
    def validate_eps_grid(cls, v: Any) -> tuple[float, ...] | None:
        return None if v is None else parse_grid(v)

    def to_probe(self) -> ProbeConfig:
        return ProbeConfig(
            delta_p=self.delta_p,
            j_p=self.j_p,
            eps_p_grid=self.eps_grid or (),
            attach_to=self.attach_to,
            linewidth=self.linewidth,
            lineshape=self.lineshape,
            ratio=self.ratio,
        )


class RunConfig(BaseModel):
    """Inputs, physics and output options shared by every subcommand."""

    command: str = Field(..., description="Subcommand name")
    schedule: Path | None = Field(
        None, description="Schedule table; the SYNTHETIC schedule when omitted"
    )
    preset: str | None = Field(None, description="Preset instance name (fm2, fm8, ...)")
    instance: Path | None = Field(None, description="Instance JSON file")
    temperature_mk: float | None = Field(
        DEFAULT_TEMPERATURE_MK, description="Temperature in mK; None for T -> 0"
    )
    output: Path = Field(..., description="Main output table path")
    format: Literal["csv", "json"] = Field("csv", description="Output table format")
    seed: int = Field(0, description="Root seed of every random stream")
    workers: int = Field(1, ge=1, description="Parallel workers")

    @field_validator("temperature_mk")
    @classmethod
    def validate_temperature(cls, v: float | None) -> float | None:
        if v is not None and not v > 0:
            raise ValidationError(f"temperature must be > 0 mK, got {v}")
        return v

    @model_validator(mode="after")
    def validate_sources(self) -> "RunConfig":
        if self.preset and self.instance:
            raise ValidationError("use either --preset or --instance, not both")
        if not self.preset and not self.instance:
            self.preset = "fm2"
        for label, path in (("schedule", self.schedule), ("instance", self.instance)):
            if path is not None and not path.is_file():
                raise ValidationError(f"{label} file not found: {path}")
        return self

    @property
    def input_files(self) -> list[Path]:
        return [p for p in (self.schedule, self.instance) if p is not None]


class SpectrumConfig(RunConfig):
    """Spectrum scan along s or h, with an optional simulated QTS map."""

    axis: Literal["s", "h"] = "s"
    s_grid: Grid = Field(default_factory=lambda: parse_grid("0:1:101"))
    s: float | None = Field(None, description="Fixed s for an h-axis scan")
    h_grid: Grid = Field(default_factory=lambda: parse_grid("-0.5:0.5:101"))
    max_levels: int | None = Field(None, ge=2, description="Levels written per row")
    centred: bool = Field(False, description="Centre the two lowest levels on zero")
    qts: bool = Field(False, description="Also write the simulated QTS map")
    probe: ProbeOptions = Field(default_factory=ProbeOptions)

    @model_validator(mode="after")
    def validate_axis(self) -> "SpectrumConfig":
        if self.axis == "h" and self.s is None:
            raise ValidationError("--axis h needs --s")
        return self


class QtsConfig(RunConfig):
    """One simulated rate spectrum and its peak fit."""

    s: float = Field(..., description="Anneal fraction")
    h: float | None = Field(None, description="Uniform bias; instance biases when None")
    peaks: int = Field(2, ge=1, description="Peaks to fit")
    probe: ProbeOptions = Field(default_factory=ProbeOptions)


class PopulationsConfig(RunConfig):
    """Protocol-recovered and Boltzmann populations along s."""

    s_grid: Grid = Field(default_factory=lambda: parse_grid(DEFAULT_S_GRID))
    levels: int = Field(2, ge=1, description="Lowest levels to probe")
    probe: ProbeOptions = Field(default_factory=ProbeOptions)


class MeasuresConfig(RunConfig):
    """Concurrence, negativity, E_f and W_chi along s."""

    s_grid: Grid = Field(default_factory=lambda: parse_grid(DEFAULT_S_GRID))
    levels: int = Field(2, ge=1, description="Levels kept in the density matrix")
    samples: int = Field(0, ge=0, description="Monte-Carlo samples for error bands")
    delta_error: float = Field(DELTA_FRACTIONAL_ERROR, ge=0)
    escale_error: float = Field(ESCALE_FRACTIONAL_ERROR, ge=0)
    witness: bool = Field(True, description="Compute the susceptibility witness")


class WitnessConfig(RunConfig):
    """Partial-transpose witness bounds per cut along s."""

    s_grid: Grid = Field(default_factory=lambda: parse_grid(DEFAULT_S_GRID))
    population_error: float = Field(0.01, ge=0, description="Error bar on P1 and P2")
    partitions: str | None = Field(None, description="Comma list of cut ids or 'all'")
    bands: bool = Field(False, description="Report bound sensitivity to the error bars")
    robustness_samples: int = Field(0, ge=0, description="Perturbed Hamiltonians per s")
    delta_error: float = Field(DELTA_FRACTIONAL_ERROR, ge=0)
    escale_error: float = Field(ESCALE_FRACTIONAL_ERROR, ge=0)
    sdp_tolerance: float = Field(SDP_TOLERANCE, gt=0)
    sdp_max_iter: int = Field(SDP_MAX_ITER, ge=1)


class RobustnessConfig(RunConfig):
    """Monte-Carlo robustness of the witness bound."""

    s_grid: Grid = Field(default_factory=lambda: parse_grid("0.3"))
    population_error: float = Field(0.01, ge=0)
    partitions: str | None = Field(
        None, description="Comma list of cut ids; the contiguous half cut when omitted"
    )
    samples: int = Field(1000, ge=1)
    delta_error: float = Field(DELTA_FRACTIONAL_ERROR, ge=0)
    escale_error: float = Field(ESCALE_FRACTIONAL_ERROR, ge=0)
