"""
Constants and default values for simulations and experiments.
"""

# Subordinator sampling
DEFAULT_ALPHA = 0.5
MAX_CUTOFF = 1e-6  # upper bound on the jump cutoff delta
BROWNIAN_TAIL_Z = 6.0  # Gaussian guard for |dB| counts below the cutoff
GAMMA_PROPOSAL_SPLIT = 1.0  # log-uniform proposal below, exponential above
PILOT_QUANTILE_DRAWS = 100_000

# Process grids
DEFAULT_DT = 1e-4
CLOCK_BLOCK_STEPS = 512  # clock-time steps drawn per block
CLOCK_QUAD_NODES = 8  # Gauss-Legendre nodes per clock-time step
CLOCK_DEPTH_SAFETY = 4.0  # a block may not climb more than depth / this
MAX_DT_HALVINGS = 3
DEFAULT_HORIZON_QUANTILE = 0.999
MAX_TRUNCATION_FREQUENCY = 0.01

# Quadrature inside jump intervals
DEFAULT_QUAD_POINTS = 64
MAX_QUAD_POINTS = 4097
QUAD_RELATIVE_TOLERANCE = 1e-8
QUAD_CHUNK_NODES = 1 << 22  # nodes evaluated per chunk

# Euler-Maruyama inside jump intervals
DEFAULT_EM_STEP = 1e-5
MIN_EM_NODES = 8
MAX_EM_NODES = 1024

# Statistics
DEFAULT_LEVEL = 0.01
MIN_GOF_COUNTS = 500
MIN_CELL_EXPECTED = 5.0
SIGMA_BAND = 3.0

# Experiments
DEFAULT_SEED = 20240601
DEFAULT_THREADS = 1
DEFAULT_REPLICATES = 200
DEFAULT_TOLERANCE = 0.15
DEFAULT_TRAILING_POINTS = 5
DYADIC_SCHEDULE = tuple(2 ** k for k in range(4, 15))
PROP2_SCHEDULE = tuple(2 ** k for k in range(2, 11))
RANDOM_PROCESS_SCHEDULE = tuple(2 ** k for k in range(4, 11))  # random X is revealed node by node
GAMMA_SCHEDULE = (10, 100, 1000, 10000)
SCHEFFE_T_VALUES = (1.0, 0.1, 0.01, 0.001)
CONTRAST_EPS_VALUES = (0.5, 0.2, 0.1, 0.05)
TAIL_X_VALUES = (0.5, 1.0, 2.0)
MARKOV_BINS = 10

# Output files
REPORT_SCHEMA_VERSION = '1'
CSV_FLOAT_FORMAT = '.17g'
