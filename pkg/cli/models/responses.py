"""
Result and manifest models written next to every output table.
"""

from typing import Any

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

__all__ = ["RunManifest", "TableResult"]


class TableResult(BaseModel):
    """One output table plus the metadata written into its header."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = Field(..., description="Suffix of the output file; empty for the main table")
    frame: pd.DataFrame = Field(..., description="Table rows")
    metadata: dict[str, Any] = Field(default_factory=dict, description="Header lines")


class RunManifest(BaseModel):
    """Everything needed to reproduce one output file."""

    command: str = Field(..., description="Subcommand")
    output: str = Field(..., description="Table the manifest describes")
    config: dict[str, Any] = Field(..., description="Fully resolved run configuration")
    inputs: dict[str, str] = Field(
        default_factory=dict, description="sha256 digest per input file"
    )
    schedule_label: str = Field("", description="Schedule provenance tag")
    instance: str = Field("", description="Instance name")
    seed: int = Field(..., description="Root seed")
    versions: dict[str, str] = Field(..., description="Package versions")
