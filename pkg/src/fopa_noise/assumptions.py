# assumptions.py

"""
Numerical assumptions for the parametric-amplifier noise calculations.

Every default used by the library and the command line lives here, so that a
reported number can always be traced back to one documented setting.
"""

import math

# -----------------------------------------------------------------------------
# Validation tolerances
# -----------------------------------------------------------------------------
# User matrices may come from ODE integrators; built-in models are exact identities.
USER_MATRIX_TOL = 1e-9
BUILTIN_MATRIX_TOL = 1e-12

# -----------------------------------------------------------------------------
# Large-signal regime
# -----------------------------------------------------------------------------
# Mean input photon number used when an exact, moment-based noise figure is
# compared with the large-|alpha| closed forms.
LARGE_SIGNAL_PHOTONS = 1e8

# Negative variances above this floor are round-off and clamp to zero silently;
# more negative values clamp to zero as well and log a warning.
VARIANCE_FLOOR = -1e-9

# Largest |mu_jk|^2 a built-in model may produce. Squares and pairwise products
# of row entries stay finite in float64 below it; the two-mode model reaches it
# near xi = 101.
MAX_ENTRY_GAIN = 1e152

# -----------------------------------------------------------------------------
# Truncated Fock space
# -----------------------------------------------------------------------------
MAX_FOCK_DIMENSION = 2_000_000   # guard on D**n
DEFAULT_CUTOFF = 8               # per-mode Fock dimension D to start from
MAX_CUTOFF = 64
CUTOFF_STEP = 2                  # D -> D + 2 for the convergence check
TRUNCATION_TOL = 1e-8            # allowed coherent-state weight beyond level D-1
CONVERGENCE_TOL = 1e-6           # relative change allowed between D and D + 2
HERMITICITY_TOL = 1e-10          # |Im <psi, N psi>| relative to <psi, psi>
ORACLE_AGREEMENT_TOL = 1e-6      # closed form vs oracle, relative
ORACLE_ABS_TOL = 1e-9            # closed form vs oracle, absolute floor

# -----------------------------------------------------------------------------
# Output formatting
# -----------------------------------------------------------------------------
CSV_FLOAT_FORMAT = "%.12g"
RESULT_COLUMNS = [
    "xi", "theta", "mode", "gain_linear", "gain_db", "nf_linear", "nf_db",
    "mean_out", "var_out", "method", "flags",
]

# -----------------------------------------------------------------------------
# Figure presets (grids over the nonlinear phase xi = gamma*P*z and Theta)
# -----------------------------------------------------------------------------
# Gains/NF versus xi in PIA operation (two-mode signal + four-mode signal,
# idler and sidebands).
FIG2_XI = {"start": 0.0, "stop": 50.0, "count": 501, "spacing": "linear"}

# Same in PSA operation, Theta = 0, signal and idler injected.
FIG3_XI = {"start": 0.0, "stop": 50.0, "count": 501, "spacing": "linear"}

# Signal gain and NF versus Theta at xi = 2, Theta in units of pi.
FIG4_XI = 2.0
FIG4_THETA_PI = {"start": -2.0, "stop": 2.0, "count": 721, "spacing": "linear"}

# Default sweep: single point, signal only, closed-form noise figure.
DEFAULT_MODEL = "two"
DEFAULT_WORKERS = 1


def physical_to_xi(gamma: float, power: float, length: float) -> float:
    """Return the nonlinear phase xi = gamma * P * z (only the product matters)."""
    return gamma * power * length


def theta_from_pi_units(value: float) -> float:
    """Convert a phase given in multiples of pi to radians."""
    return value * math.pi
