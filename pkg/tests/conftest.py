"""
Shared fixtures: schedules, small instances and their spectra.
"""

import numpy as np
import pytest

from qaent.model import (
    AnnealSchedule,
    ProblemInstance,
    assemble_hamiltonian,
    build_instance,
    flat_schedule,
    preset,
    synthetic_schedule,
)
from qaent.spectra import Spectrum, eigendecompose


@pytest.fixture(scope="session")
def synthetic() -> AnnealSchedule:
    return synthetic_schedule()


@pytest.fixture
def flat() -> AnnealSchedule:
    """Delta = 3 GHz and E = 1 GHz for every s."""
    return flat_schedule(delta=3.0, energy_scale=1.0)


@pytest.fixture
def fm2() -> ProblemInstance:
    return preset("fm2")


@pytest.fixture
def fm4() -> ProblemInstance:
    return preset("fm4")


@pytest.fixture
def single_qubit() -> ProblemInstance:
    return build_instance(1, h=[0.0], name="single")


@pytest.fixture
def fm2_spectrum(fm2: ProblemInstance) -> Spectrum:
    """Coupled pair at Delta = 2 GHz, E = 1 GHz."""
    return eigendecompose(assemble_hamiltonian(fm2, flat_schedule(2.0, 1.0), 0.5))


@pytest.fixture
def fm4_spectrum(fm4: ProblemInstance) -> Spectrum:
    """Four-qubit ring at Delta = 5 GHz, E = 1 GHz."""
    return eigendecompose(assemble_hamiltonian(fm4, flat_schedule(5.0, 1.0), 0.5))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
