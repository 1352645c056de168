"""
Grid parsing shared by every run configuration.
"""

from collections.abc import Sequence
from typing import Annotated

import numpy as np
from pydantic import BeforeValidator

from qaent.exceptions import ValidationError

__all__ = ["Grid", "parse_grid", "parse_partitions"]


def parse_grid(value: str | float | Sequence[float] | np.ndarray) -> tuple[float, ...]:
    """
    Parse ``start:stop:num`` (inclusive linspace), a comma list or numbers.

    Raises:
        ValidationError: Empty grid, malformed text or non-finite values
    """
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValidationError("Grid is empty")
        try:
            if ":" in text:
                parts = text.split(":")
                if len(parts) != 3:
                    raise ValidationError(f"expected start:stop:num, got {text!r}")
                start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
                if num < 1:
                    raise ValidationError(f"grid needs at least one point, got {num}")
                grid = np.linspace(start, stop, num)
            else:
                grid = np.array([float(v) for v in text.split(",") if v.strip()])
        except ValueError as e:
            raise ValidationError(f"cannot parse grid {text!r}: {e}") from e
    else:
        grid = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
    if grid.size == 0:
        raise ValidationError("Grid is empty")
    if not np.all(np.isfinite(grid)):
        raise ValidationError("Grid contains non-finite values")
    return tuple(float(v) for v in grid)


def parse_partitions(value: str | Sequence[int] | None, n: int) -> list[int] | None:
    """Partition ids from ``all``, None or a comma list of bitmasks."""
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"", "all"}:
            return None
        try:
            ids = [int(v, 0) for v in text.split(",") if v.strip()]
        except ValueError as e:
            raise ValidationError(f"cannot parse partitions {value!r}: {e}") from e
    else:
        ids = [int(v) for v in value]
    full = (1 << n) - 1
    for pid in ids:
        if not 0 < pid < full:
            raise ValidationError(f"partition id {pid} is not a proper cut of {n} qubits")
    return ids


Grid = Annotated[tuple[float, ...], BeforeValidator(parse_grid)]
