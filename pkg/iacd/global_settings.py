# ----------------------------------------------------------------------------------------------------------------------
# Signature catalogue settings
# ----------------------------------------------------------------------------------------------------------------------

# version tag written into every signature database and model bundle
CATALOGUE_VERSION = "iacd-catalogue-1"
# number of statistics computed per traffic direction
STATS_PER_DIRECTION = 70
# full signature dimension: 2 capture points x 2 directions x 70 statistics
SIGNATURE_DIMENSION = 4 * STATS_PER_DIRECTION

# ----------------------------------------------------------------------------------------------------------------------
# TCP defaults
# ----------------------------------------------------------------------------------------------------------------------

MSS = 1460
# header bytes counted per packet on the wire (IPv4 + TCP without options)
HEADER_BYTES = 40
# stall threshold used when no RTT sample is available (microseconds)
DEFAULT_STALL_THRESHOLD_US = 200_000

# ----------------------------------------------------------------------------------------------------------------------
# Testbed settings (healthy access link)
# ----------------------------------------------------------------------------------------------------------------------

HEALTHY_BANDWIDTH_BPS = 80_000_000
HEALTHY_ONE_WAY_DELAY_MS = 10.0
# residual reordering present on every testbed link
TESTBED_RESIDUAL_REORDER_RATE = 0.01
FAULTY_LOSS_RATES = (0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10)
FAULTY_DELAYS_MS = (15.0, 25.0, 40.0, 60.0, 100.0)

# healthy client socket buffers (bytes), sized above the healthy link BDP
HEALTHY_READ_BUFFER = 262_144
HEALTHY_WRITE_BUFFER = 262_144
# insufficient buffer levels, in segments
BUFFER_LEVELS_SEGMENTS = (4, 8, 16)

DEFAULT_TRANSFER_SIZE = 1_048_576

# ----------------------------------------------------------------------------------------------------------------------
# Simulator settings
# ----------------------------------------------------------------------------------------------------------------------

DELAYED_ACK_TIMEOUT_US = 40_000
MIN_RTO_US = 200_000
INITIAL_RTO_US = 1_000_000
MAX_RTO_US = 60_000_000
REORDER_EXTRA_DELAY_US = 1_000
DUPACK_THRESHOLD = 3
MAX_DUPACK_THRESHOLD = 30
MAX_SACK_BLOCKS = 3
MAX_VIRTUAL_TIME_US = 600_000_000
CLIENT_ADDR = "10.0.0.2"
SERVER_ADDR = "10.0.0.1"
SERVER_PORT = 80

# ----------------------------------------------------------------------------------------------------------------------
# Preprocessing settings
# ----------------------------------------------------------------------------------------------------------------------

# unseen samples are clamped into this range after scaling
SCALED_CLAMP_LOW = -0.5
SCALED_CLAMP_HIGH = 1.5

# ----------------------------------------------------------------------------------------------------------------------
# SVM settings
# ----------------------------------------------------------------------------------------------------------------------

SVM_DEFAULT_C = 1.0
SVM_MAX_ITER = 1000
SVM_TOLERANCE = 1e-3
# alpha values below this are treated as zero when extracting support vectors
SVM_ALPHA_EPSILON = 1e-12
# assert per-pass dual objective growth while training
SVM_DEBUG_CHECKS = False
C_GRID = (2.0 ** -3, 2.0 ** -1, 2.0 ** 1, 2.0 ** 3, 2.0 ** 5, 2.0 ** 7)
GAMMA_GRID = (2.0 ** -7, 2.0 ** -5, 2.0 ** -3, 2.0 ** -1, 2.0 ** 1, 2.0 ** 3)
DEFAULT_RBF_GAMMA = 2.0 ** -3

# ----------------------------------------------------------------------------------------------------------------------
# Feature selection settings
# ----------------------------------------------------------------------------------------------------------------------

MAX_K_FOLDS = 5
# accuracy tolerance (fraction) for preferring a smaller feature count
SELECTION_TOLERANCE = 0.005
LPD_CANDIDATE_SIZES = (10, 25, 50, 75, 100)
DEFAULT_SEED = 7

# ----------------------------------------------------------------------------------------------------------------------
# Client fault classes
# ----------------------------------------------------------------------------------------------------------------------

# class index -> (short name, CF modules expected to fire)
FAULT_CLASSES = {
    0: ("Healthy", ()),
    1: ("SACK", (1,)),
    2: ("DSACK", (2,)),
    3: ("RBuf", (3,)),
    4: ("WBuf", (4,)),
    5: ("R-WBuf", (3, 4)),
}
TRAINED_FAULT_CLASSES = (1, 2, 3, 4)

# per-module kernel defaults: kind, polynomial degree, feature count
CF_MODULE_DEFAULTS = {
    1: ("LINEAR", 1, 12),
    2: ("RBF", 1, 32),
    3: ("POLY", 3, 24),
    4: ("RBF", 1, 16),
}
