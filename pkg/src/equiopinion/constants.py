"""Default tolerances and numerical settings, in one place.

Every function that uses one of these takes it as a keyword argument, so the
values below are only the defaults.
"""

SIMPLEX_TOL = 1e-12          # row-sum / nonnegativity slack for opinion states
THETA_SIM = 0.05             # opinion threshold used to classify simulated states
THETA_EXACT = 0.0            # opinion threshold for exact / axial computations

K_HTO = 0.5                  # sigmoid asymmetry parameter

FD_STEP = 1e-5               # central finite-difference step
MODE_INTERACTION_TOL = 1e-12 # |gamma - delta| below this is mode interaction

GROUP_ELEMENT_CAP = 10_000   # max subgroup order enumerated explicitly
GRAM_SCHMIDT_TOL = 1e-10     # pivot tolerance for basis orthonormalization

DT = 0.01                    # RK4 step
T_MAX = 200.0
STEADY_TOL = 1e-8            # sup-norm of drift at which a run is declared steady
INIT_SCALE = 0.01            # radius of random initial deviations
DIVERGENCE_BOUND = 1e2       # sup-norm of z that signals a failed integration
SWITCH_THRESHOLD = 0.1       # jump in ||z|| per unit time separating switch-like onsets

SCHEMA_VERSION = 1
