from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
import logging
import sys
from typing import TypeVar

import numpy as np

from .exceptions import ValidationError

# --- Logging ---
logger = logging.getLogger("qaent")
handler = logging.StreamHandler(sys.stderr)
handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
logger.addHandler(handler)
logger.setLevel(logging.INFO)
logger.propagate = False

T = TypeVar("T")
R = TypeVar("R")


# --- Sweeps ---
def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """
    Apply ``fn`` to every item, optionally on a thread pool.

    LAPACK drops the GIL, so threads give real speed-up on dense
    diagonalizations. Results come back in input order.

    Args:
        fn: Pure function of one item
        items: Work items (grid points, samples, bipartitions)
        workers: Thread count; 1 or fewer runs inline

    Returns:
        List of results aligned with ``items``
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def spawn_generators(
    seed: int | np.random.SeedSequence, count: int
) -> list[np.random.Generator]:
    """One independent generator per task so results ignore worker count."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(count)
    return [np.random.default_rng(child) for child in children]


def hermitize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def hermiticity_error(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


def as_grid(values: Sequence[float] | np.ndarray) -> np.ndarray:
    grid = np.asarray(values, dtype=float).ravel()
    if grid.size == 0:
        raise ValidationError("Grid is empty")
    return grid
