from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Environment configuration
    ENV: str = "development"  # development / testing / production

    # Basic configuration
    PROJECT_NAME: str = "spintomo"
    VERSION: str = "1.0.0"

    # Logging configuration
    LOG_LEVEL: str = ""  # Empty means derive from ENV
    LOG_TO_FILE: bool = False
    LOG_DIR: str = "logs"

    # Randomness (SPINTOMO_SEED sets the default seed of every command)
    SEED: int = 42

    # Worker pool for independent work items
    THREAD_POOL_WORKERS: int = 4

    # spin-core tolerances
    NORM_TOLERANCE: float = 1e-12
    HERMITICITY_TOLERANCE: float = 1e-12
    POSITIVITY_TOLERANCE: float = 1e-10
    AXIS_TOLERANCE: float = 1e-9

    # measurement
    PROBABILITY_ROUNDOFF: float = 1e-10
    DEFAULT_CONE_THETA: float = 1.0

    # recon-mixed
    RANK_RELATIVE_THRESHOLD: float = 1e-10
    EXACT_RESIDUAL_TOLERANCE: float = 1e-8
    CONE_SCAN_POINTS: int = 89
    CONE_SCAN_REFINE: bool = True
    RANDOM_FRAME_CANDIDATES: int = 200

    # recon-pure
    ZERO_AMPLITUDE_TOLERANCE: float = 1e-9
    PARTNER_DEDUP_TOLERANCE: float = 1e-9
    PURE_MAX_ITERATIONS: int = 200
    PURE_GRADIENT_TOLERANCE: float = 1e-12
    PURE_RESIDUAL_TOLERANCE: float = 1e-8
    PURE_SEED_BATCH: int = 16
    PURE_RANDOM_RESTARTS: int = 32
    THIRD_AXIS_TOLERANCE: float = 1e-8
    SAME_INTENSITY_TOLERANCE: float = 1e-10

    # indirect-ops
    CONSISTENCY_Z_THRESHOLD: float = 4.0
    HOLDOUT_MIN_ANGLE: float = 1e-6

    # particle-demo
    PARTICLE_POSITION_TOLERANCE: float = 1e-12
    PARTICLE_MOMENTUM_TOLERANCE: float = 1e-10
    PARTICLE_PARITY_TOLERANCE: float = 1e-10
    PARTICLE_INDEPENDENCE_TOLERANCE: float = 1e-6

    # selftest sizes
    SELFTEST_MIXED_STATES: int = 20
    SELFTEST_PURE_STATES: int = 100
    SELFTEST_CONSISTENCY_RUNS: int = 50

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "SPINTOMO_"


settings = Settings()
