"""
Configuration defaults for the private ranking aggregation simulator.

Values can be overridden through environment variables (or a .env file).
"""

import os

from dotenv import load_dotenv

load_dotenv()

# Privacy Configuration
PRIVACY_CONFIG = {
    "default_delta": 1e-4,
    "default_sensitivity": 1.0,  # one pairwise bit
    "threshold": 0.5,  # Gaussian-noised bits are compared against this
    "gaussian_constant": 1.25,  # sigma uses sqrt(2 ln(1.25 / delta))
}

# Synthetic Data Configuration
DATAGEN_CONFIG = {
    "default_m": 15,
    "default_n": 100,
    "default_theta": 0.25,
    "agent_counts": [100, 1000, 2500, 5000],
    "default_seed": 2023,
}

# Protocol Configuration
PROTOCOL_CONFIG = {
    "default_k": 1,
    "dump_columns": ["pair_i", "pair_j", "bit"],
}

# Aggregation Configuration
AGGREGATION_CONFIG = {
    "kemeny_max_m": 8,  # m! orders are enumerated
}

# Experiment Configuration
EXPERIMENT_CONFIG = {
    "default_repetitions": 300,
    "desk_repetitions": 50,
    "default_seed": 2023,
    "ci_z": 1.96,
    "n_jobs": int(os.getenv("RANKAGG_N_JOBS", "1")),
    "methods": [
        "ddp-helnaksort",
        "ddp-helnaksort-noshuffle",
        "ldp-kwiksort",
        "ldp-quicksort",
        "hra",
        "kemeny",
        "ra",
        "borda",
        "kwiksort",
        "quicksort",
    ],
}

# Output Configuration
OUTPUT_CONFIG = {
    "output_dir": os.getenv("RANKAGG_OUTPUT_DIR", "data/results"),
    "result_columns": [
        "method", "m", "n", "theta", "epsilon", "epsilon_scope", "delta",
        "k", "shuffle", "reps", "mean_dist", "std_dist", "ci95", "seconds",
    ],
    "plot_columns": ["x", "series", "y", "ci"],
    "float_format": "%.6f",
}

# Logging
LOG_LEVEL = os.getenv("RANKAGG_LOG_LEVEL", "INFO")
