"""
Exact-diagonalization toolkit for small transverse-field Ising annealers:
spectra, simulated tunneling spectroscopy, thermal states, entanglement
measures and entanglement witnesses.
"""

from .entangle import (
    Bipartition,
    MeasureSeries,
    concurrence,
    entanglement_of_formation,
    enumerate_bipartitions,
    global_negativity,
    measure_series,
    negativity,
    negativity_profile,
    partial_transpose,
)
from .exceptions import NumericalError, QaentError, ValidationError
from .model import (
    AnnealSchedule,
    HermitianOperator,
    ProbeConfig,
    ProblemInstance,
    assemble_hamiltonian,
    assemble_probe_hamiltonian,
    build_instance,
    load_instance,
    load_schedule,
    preset,
    synthetic_schedule,
)
from .qts import (
    PeakFit,
    PopulationEstimate,
    RateSpectrum,
    estimate_populations,
    fit_gap,
    fit_peaks,
    simulate_population_protocol,
    simulate_qts_map,
    simulate_rate_spectrum,
)
from .sdp import SdpResult, maximize_expectation
from .spectra import Spectrum, SpectrumScan, eigendecompose, extract_gap, scan_vs_h, scan_vs_s
from .thermal import (
    DensityMatrix,
    Temperature,
    boltzmann_populations,
    build_density_matrix,
    equilibrium_populations,
)
from .witness import (
    Measured,
    RobustnessSummary,
    SusceptibilityMatrix,
    WitnessOperator,
    construct_witness_operator,
    cross_susceptibility,
    robustness_monte_carlo,
    sdp_upper_bound,
    witness_R,
    witness_report,
    witness_Wchi,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "Bipartition",
    "DensityMatrix",
    "HermitianOperator",
    "MeasureSeries",
    "Measured",
    "NumericalError",
    "PeakFit",
    "PopulationEstimate",
    "ProbeConfig",
    "ProblemInstance",
    "QaentError",
    "RateSpectrum",
    "RobustnessSummary",
    "SdpResult",
    "Spectrum",
    "SpectrumScan",
    "SusceptibilityMatrix",
    "Temperature",
    "ValidationError",
    "WitnessOperator",
    "assemble_hamiltonian",
    "assemble_probe_hamiltonian",
    "boltzmann_populations",
    "build_density_matrix",
    "build_instance",
    "concurrence",
    "construct_witness_operator",
    "cross_susceptibility",
    "eigendecompose",
    "entanglement_of_formation",
    "enumerate_bipartitions",
    "equilibrium_populations",
    "estimate_populations",
    "extract_gap",
    "fit_gap",
    "fit_peaks",
    "global_negativity",
    "load_instance",
    "load_schedule",
    "maximize_expectation",
    "measure_series",
    "negativity",
    "negativity_profile",
    "partial_transpose",
    "preset",
    "robustness_monte_carlo",
    "scan_vs_h",
    "scan_vs_s",
    "sdp_upper_bound",
    "simulate_population_protocol",
    "simulate_qts_map",
    "simulate_rate_spectrum",
    "synthetic_schedule",
    "witness_R",
    "witness_Wchi",
    "witness_report",
]
