import os

from simple_logger.logger import get_logger

LOGGER = get_logger(name="polycert", filename=os.environ.get("POLYCERT_LOG_FILE"))

APP_DATA_DIR = os.path.join(os.path.expanduser("~"), ".polycert")

DEFAULT_TOL = 1e-8
DEFAULT_ITERS = 20
DEFAULT_R_MAX = 3
DEFAULT_SOLVER = "CLARABEL"
SUPPORTED_SOLVERS = ("CLARABEL", "SCS")

# Optimal assignments must replay within this multiple of the requested tolerance.
RESIDUAL_FACTOR = 10

# Numerical rank thresholds on eigenvalue ratios.
RANK_ONE_THRESHOLD = 1e-6
RANK_TWO_THRESHOLD = 1e-6

SQRT_WEIGHT_GUARD = 1e-10
NEWTON_THIRD_DERIVATIVE_FLOOR = 1e-12
SNAP_MAX_DENOMINATOR = 10**6

MAX_STENGLE_CONSTRAINTS = 10
MAX_BRUTE_FORCE_SIZE = 20
MAX_EXPONENTIAL_FAMILY_SIZE = 6
MAX_ENUMERATION_SIZE = 5
MAX_ENUMERATION_SUPPORT = 3

RECOVERY_CASE_THRESHOLD = 0.4

# Exit codes
EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_NEGATIVE = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64

# Solve outcome strings
OPTIMAL_STR = "optimal"
INFEASIBLE_STR = "infeasible"
UNBOUNDED_STR = "unbounded"
INACCURATE_STR = "inaccurate"

# Rank lowering objectives
TRACE_STR = "trace"
SQUARE_ROOT_STR = "square_root"
DIAGONAL_GAP_STR = "diagonal_gap"
RANK_LOWERING_OBJECTIVES = (TRACE_STR, SQUARE_ROOT_STR, DIAGONAL_GAP_STR)

# Sos kinds
SCALAR_STR = "scalar"
MATRIX_STR = "matrix"

# Certificate kinds
COERCIVE_STR = "coercive"
COMPACT_STR = "compact"
ARCHIMEDEAN_STR = "archimedean"
CUBIC_SOS_STR = "cubic-sos"
CERTIFICATE_KINDS = (COERCIVE_STR, COMPACT_STR, ARCHIMEDEAN_STR, CUBIC_SOS_STR)

# Local minimum search reasons
SOP_SET_EMPTY_STR = "SOP set empty"
RELINT_FAILS_TOC_STR = "relint point fails TOC"

# Newton modes
UNIVARIATE_STR = "univariate-closed-form"
MULTIVARIATE_STR = "multivariate-via-cubic-min"
CLASSICAL_STR = "classical"
NEWTON_MODES = (UNIVARIATE_STR, MULTIVARIATE_STR, CLASSICAL_STR)

# Generator variants
CRITICAL_CUBIC_STR = "critical-cubic"
SECOND_ORDER_QUARTIC_STR = "second-order-quartic"
SAT_VARIANTS = (
    "sphi",
    "pphi-deg6",
    "phat-quartic",
    "sphih-coercivity",
    "qcqp-linear-objective",
    "closedness-Sphi",
    "boundedness-S",
    "stable-compactness-Tphi",
)

# Nash decision methods
LP1_STR = "LP1"
SDP3_STR = "SDP3"
LP2_STR = "LP2"
SDP4_STR = "SDP4"
GRIESMER_STR = "griesmer"
JURG_STR = "jurg"

BENCH_COLUMNS = ("size", "algorithm", "count", "Max", "Mean", "Median", "StDev")

# Local minimum search outcomes
LOCAL_MIN_STR = "local-min"
NO_LOCAL_MIN_STR = "no-local-min"
INCONCLUSIVE_STR = "inconclusive"
NOT_STRICT_STR = "relint point not strict"

# Pseudo-inverse Newton refinement of recovered second-order points
POLISH_MAX_STEPS = 60

# Rank-2 recovery guarantees
EXACT_STR = "exact"
FIVE_ELEVENTHS_STR = "5/11"
ONE_THIRD_SYMMETRIC_STR = "1/3-symmetric"
MEASURED_ONLY_STR = "measured-only"
GUARANTEE_VALUES = {EXACT_STR: 0.0, FIVE_ELEVENTHS_STR: 5 / 11, ONE_THIRD_SYMMETRIC_STR: 1 / 3}

# Strategy exclusion verdicts
PERSISTENT_CERTIFIED_STR = "persistent-certified"
