"""
Table and manifest writers.

Tables are CSV with ``# key: value`` header lines, or JSON with the same
metadata. Every table gets a ``<file>.manifest.json`` next to it. Nothing
time-dependent is written, so equal configs and seeds give equal bytes.
"""

import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any

import cvxpy
import numpy as np
import pandas as pd
import pydantic
import scipy

import qaent

from .models import RunConfig, RunManifest, TableResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def package_versions() -> dict[str, str]:
    return {
        "qaent": qaent.__version__,
        "numpy": np.__version__,
        "cvxpy": cvxpy.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


def _format_value(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and paths for JSON."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def render_table(result: TableResult, fmt: str) -> str:
    """Serialize one table with its metadata header."""
    if fmt == "json":
        records = json.loads(result.frame.to_json(orient="records", double_precision=10))
        payload = {"metadata": _plain(result.metadata), "records": records}
        return json.dumps(payload, indent=2) + "\n"
    buffer = io.StringIO()
    for key, value in result.metadata.items():
        buffer.write(f"# {key}: {_format_value(value)}\n")
    result.frame.to_csv(
        buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="nan"
    )
    return buffer.getvalue()


def table_path(config: RunConfig, name: str) -> Path:
    """Main table at ``config.output``; extra tables as ``<stem>.<name><suffix>``."""
    output = config.output
    if not name:
        return output
    suffix = output.suffix or f".{config.format}"
    return output.with_name(f"{output.stem}.{name}{suffix}")


def write_results(
    results: list[TableResult],
    config: RunConfig,
    instance_name: str,
    schedule_label: str,
) -> list[Path]:
    """
    Write every table and its manifest.

    Args:
        results: Tables produced by a service
        config: Resolved run configuration
        instance_name: Name of the instance that was run
        schedule_label: Provenance tag of the schedule

    Returns:
        Paths of the written tables
    """
    inputs = {str(p): file_digest(p) for p in config.input_files}
    written = []
    for result in results:
        path = table_path(config, result.name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_table(result, config.format), encoding="utf-8")
        manifest = RunManifest(
            command=config.command,
            output=path.name,
            config=_plain(config.model_dump(mode="json")),
            inputs=inputs,
            schedule_label=schedule_label,
            instance=instance_name,
            seed=config.seed,
            versions=package_versions(),
        )
        manifest_path = path.with_name(path.name + ".manifest.json")
        manifest_path.write_text(
            json.dumps(manifest.model_dump(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        logger.info(f"Wrote {len(result.frame)} rows to {path}")
        written.append(path)
    return written
