import math

# Standard deviation of Uniform[0,1]; every "[0,1]-uniform units" curve bakes this in
SIGMA_UNIFORM = math.sqrt(1.0 / 12.0)

EULER_GAMMA = 0.5772156649015329

# Empirical expected critical couplings, a*sqrt(n) + b
CHAIN_CURVE = {"a": 0.252, "b": -0.168}
CHAIN_CURVE_SIGMA = {"a": 0.873, "b": -0.581}
BINARY_CURVE = {"a": 0.212, "b": -0.082}

# Expected displacement of an n-step walk, sigma*sqrt(n/pi) - RANDOM_WALK_OFFSET*sigma
RANDOM_WALK_OFFSET = 0.516068

# Above this size partition sums use compensated accumulation
COMPENSATED_SUM_THRESHOLD = 10_000

# Monte Carlo engine
SAMPLE_BLOCK_SIZE = 4096
HISTOGRAM_BINS = 200

# Integrator defaults
DEFAULT_DT = 0.01
DEFAULT_T_MAX = 500.0
DEFAULT_FP_TOL = 1e-6
DEFAULT_SAVE_STRIDE = 10
SUSTAIN_FRACTION = 0.05

EXHAUSTIVE_MAX_N = 9

TREE_FAMILIES = [
    "chain",
    "star",
    "dumbbell",
    "binary",
    "tadpole",
    "random_uniform",
    "scale_free",
]

# Families compared against the bounds (tadpole carries its diameter)
BOUND_FAMILIES = ["chain", "star", "dumbbell", "binary", "tadpole(8)"]
SWEEP_FAMILIES = BOUND_FAMILIES + ["random_uniform", "scale_free"]

FIGURE_GRIDS = {
    "order": [2, 3, 4, 5, 6, 8, 10, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100,
              125, 150, 175, 200, 225, 250, 275, 300],
    "even_order": [4, 6, 8, 10, 14, 20, 26, 30, 40, 50, 60, 70, 80, 90, 100,
                   126, 150, 176, 200, 226, 250, 276, 300],
    "sweep": [20, 60, 100, 150, 200, 300],
    "mu": [0, 1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000],
    "walk_n": 60,
    "tadpole_diameter": 8,
    "rearrange_n": 255,
}

FIGURE_IDS = {
    "3": "walk",
    "walk": "walk",
    "4": "chain",
    "5": "star",
    "6": "mu",
    "mu": "mu",
    "7": "dumbbell",
    "8": "binary",
    "9": "diameter",
    "10": "partition",
    "11": "partition_log",
    "tadpole": "tadpole",
    "normal-plog": "normal_partition_log",
    "normal-order": "normal_order",
    "rearrange": "rearrange",
}

# RNG spawn key reserved for topology generation; sample blocks use small keys
TOPOLOGY_STREAM = 2**32
