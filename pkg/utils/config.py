"""Configuration management"""


class Config:
    """Numeric and runtime defaults"""

    # Numerics
    LAYERNORM_EPS = 1e-5
    COSINE_EPS = 1e-12
    STD_FLOOR = 1e-6
    GRADCHECK_EPS = 1e-5
    GRADCHECK_TOLERANCE = 1e-5

    # Initialization
    EMBEDDING_INIT_STD = 0.02
    POOL_INIT_STD = 0.02
    POSITION_INIT_STD = 1.0  # temporal window MLPs

    # Optimizer
    LEARNING_RATE = 1e-3
    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8
    CLIP_NORM = 5.0
    BATCH_SIZE = 64

    # Metrics
    MAPE_FLOOR = 1e-1

    # Files
    LOG_FILE = "hstmixer.log"
    TRAIN_LOG_FILE = "train_log.tsv"
    CHECKPOINT_FILE = "best.ckpt"
    CONFIG_SNAPSHOT_FILE = "run_config.yaml"
