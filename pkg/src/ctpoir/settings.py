"""Default configuration"""


class Config:
    """Default configuration"""

    # HU thresholds (bootstrap and builtin pipeline)
    LUNG_THRESHOLD = -200
    INFECTED_THRESHOLD = -750
    FILL_LUNG_HOLES = True

    # 2.5D harness
    BINARIZE_TAU = 0.5

    # Region filter
    FILTER_THRESHOLD = 0.45
    MIN_REGION_VOXELS = 1
    PATCH_SIZE = 32

    # HU histogram
    HISTOGRAM_BIN_WIDTH = 50

    # Execution
    THREADS = 1
    SEED = None

    # Logging
    LOG_LEVEL = "WARNING"
