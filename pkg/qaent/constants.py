"""Physical constants and numerical tolerances shared across qaent."""

# k_B / h in GHz per kelvin
KB_OVER_H_GHZ_PER_K = 20.8366

MAX_QUBITS = 12
# system plus one probe qubit
MAX_COMPOSITE_QUBITS = MAX_QUBITS + 1

HERMITICITY_TOL = 1e-12
POPULATION_SUM_TOL = 1e-9
DENSITY_TRACE_TOL = 1e-10
DENSITY_PSD_TOL = 1e-10

# eigenvalue of a partial transpose must sit below this to count as entangled
PPT_TOL = 1e-9
NEGATIVITY_FLOOR = 1e-12
DEGENERACY_GAP_GHZ = 1e-6

FERROMAGNETIC_J = -2.5

DEFAULT_TEMPERATURE_MK = 12.5
DEFAULT_LINEWIDTH_GHZ = 0.4
DEFAULT_PROBE_RATIO = 100.0
# |J_P| below this multiple of k_B T draws a warning
PROBE_THERMAL_RATIO = 10.0
# Gamma_0 = 1 / us at Delta_P = 1 MHz
GAMMA0_PER_US_AT_1MHZ = 1.0

DELTA_FRACTIONAL_ERROR = 0.08
ESCALE_FRACTIONAL_ERROR = 0.05

SUSCEPTIBILITY_STEP = 1e-3
RICHARDSON_WARN = 1e-3

SDP_TOLERANCE = 1e-8
SDP_MAX_ITER = 200
SDP_GAP_TARGET = 1e-6
# largest operator handed to cvxpy as one dense LMI; interior-point scaling
# blocks grow as (d(d+1)/2)^2
SDP_DENSE_MAX_DIM = 64
