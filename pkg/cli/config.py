"""
Configuration for command-line runs.
"""

from functools import lru_cache
from typing import Literal

from dotenv import find_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from qaent.constants import (
    DEFAULT_LINEWIDTH_GHZ,
    DEFAULT_PROBE_RATIO,
    DEFAULT_TEMPERATURE_MK,
    DELTA_FRACTIONAL_ERROR,
    ESCALE_FRACTIONAL_ERROR,
    SDP_MAX_ITER,
    SDP_TOLERANCE,
)
from qaent.exceptions import ConfigurationError


class Settings(BaseSettings):
    """Run defaults loaded from environment variables or a .env file."""

    # Physics
    temperature_mk: float = Field(
        default=DEFAULT_TEMPERATURE_MK, alias="QAENT_TEMPERATURE_MK"
    )
    linewidth_ghz: float = Field(default=DEFAULT_LINEWIDTH_GHZ, alias="QAENT_LINEWIDTH_GHZ")
    probe_delta_ghz: float = Field(default=0.001, alias="QAENT_PROBE_DELTA_GHZ")
    probe_coupling_ghz: float = Field(default=-2.0, alias="QAENT_PROBE_COUPLING_GHZ")
    probe_ratio: float = Field(default=DEFAULT_PROBE_RATIO, alias="QAENT_PROBE_RATIO")

    # Uncertainty model
    seed: int = Field(default=0, alias="QAENT_SEED")
    mc_samples: int = Field(default=1000, alias="QAENT_MC_SAMPLES")
    delta_error: float = Field(default=DELTA_FRACTIONAL_ERROR, alias="QAENT_DELTA_ERROR")
    escale_error: float = Field(
        default=ESCALE_FRACTIONAL_ERROR, alias="QAENT_ESCALE_ERROR"
    )
    population_error: float = Field(default=0.01, alias="QAENT_POPULATION_ERROR")

    # Execution and output
    workers: int = Field(default=1, alias="QAENT_WORKERS")
    output_format: Literal["csv", "json"] = Field(
        default="csv", alias="QAENT_OUTPUT_FORMAT"
    )
    log_level: str = Field(default="INFO", alias="QAENT_LOG_LEVEL")

    # SDP
    sdp_tolerance: float = Field(default=SDP_TOLERANCE, alias="QAENT_SDP_TOLERANCE")
    sdp_max_iter: int = Field(default=SDP_MAX_ITER, alias="QAENT_SDP_MAX_ITER")

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False)

    def validate_required_settings(self) -> None:
        """Reject settings no run could use."""
        if self.temperature_mk <= 0:
            raise ConfigurationError("QAENT_TEMPERATURE_MK must be > 0")
        if self.linewidth_ghz <= 0:
            raise ConfigurationError("QAENT_LINEWIDTH_GHZ must be > 0")
        if self.probe_coupling_ghz == 0:
            raise ConfigurationError("QAENT_PROBE_COUPLING_GHZ must be nonzero")
        if self.workers < 1:
            raise ConfigurationError("QAENT_WORKERS must be >= 1")
        if min(self.delta_error, self.escale_error, self.population_error) < 0:
            raise ConfigurationError("error scales must be >= 0")
        if self.sdp_tolerance <= 0 or self.sdp_max_iter < 1:
            raise ConfigurationError("QAENT_SDP_TOLERANCE and QAENT_SDP_MAX_ITER must be positive")
        if self.log_level.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            raise ConfigurationError(f"unknown QAENT_LOG_LEVEL {self.log_level!r}")


@lru_cache
def get_settings() -> Settings:
    """Get run settings (cached)."""
    settings = Settings(_env_file=find_dotenv(usecwd=True) or None)  # type: ignore
    settings.validate_required_settings()
    return settings
