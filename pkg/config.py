"""
Configuration settings for the Lévy exponential-functional toolkit
"""

import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    """Configuration class for the toolkit"""

    # Root finding
    ROOT_BRACKET_MAX: float = 1e9
    ROOT_RTOL: float = 1e-12
    ROOT_MAX_ITER: int = 2000

    # Numerical Laplace inversion (Euler summation)
    LAPLACE_INVERSION_TERMS: int = 40
    LAPLACE_INVERSION_EULER_TERMS: int = 11
    LAPLACE_INVERSION_A: float = 18.4
    LAPLACE_INVERSION_RTOL: float = 1e-6

    # Quadrature for the tail-exponent predictors
    QUAD_EPSABS: float = 1e-8
    QUAD_EPSREL: float = 1e-8
    DIFF_STEP_REL: float = 1e-5

    # Path simulation
    DEFAULT_DT: float = 1e-3
    STEP_BUDGET: int = 100_000_000
    PATH_BLOCK_SIZE: int = 4096
    SPLIT_FINAL_WINDOW: float = 0.1
    SPLIT_SAFETY_MARGIN: float = 1.0
    BARRIER_MIN: float = 15.0
    BARRIER_OFFSET: float = 5.0
    BARRIER_EXTENSION: float = 5.0
    MAX_BARRIER_EXTENSIONS: int = 8
    REJECTION_X0: float = 0.05
    REJECTION_MIN_ACCEPTANCE: float = 1e-4
    REJECTION_ATTEMPT_FACTOR: float = 200.0

    # Monte Carlo estimation
    DEFAULT_N: int = 200_000
    DEFAULT_TRUNCATION_LEVEL: float = 10.0
    DEFAULT_WORKERS: int = 1
    CHUNK_SIZE: int = 512
    POISSON_SERIES_DIGITS: int = 12
    DISCRETIZATION_ALLOWANCE: float = 0.02

    # Statistical checks
    KS_PVALUE_THRESHOLD: float = 0.01
    DKW_DELTA: float = 0.01
    MIN_CHECK_SAMPLES: int = 10_000
    MIN_CDF_SAMPLES: int = 100
    MIN_TAIL_EXCEEDANCES: int = 30

    # Logging
    LOG_LEVEL: str = "INFO"

    # Output settings
    DEFAULT_OUTPUT_DIR: str = "."

    @classmethod
    def get_root_bracket_max(cls) -> float:
        """Get the root-bracket upper limit from environment or default"""
        return float(os.getenv("LEVY_ROOT_BRACKET_MAX", cls.ROOT_BRACKET_MAX))

    @classmethod
    def get_laplace_inversion_terms(cls) -> int:
        """Get the number of Euler-inversion series terms from environment or default"""
        return int(os.getenv("LEVY_LAPLACE_INVERSION_TERMS", cls.LAPLACE_INVERSION_TERMS))

    @classmethod
    def get_default_dt(cls) -> float:
        """Get the default grid step from environment or default"""
        return float(os.getenv("LEVY_DEFAULT_DT", cls.DEFAULT_DT))

    @classmethod
    def get_step_budget(cls) -> int:
        """Get the per-path step budget from environment or default"""
        return int(os.getenv("LEVY_STEP_BUDGET", cls.STEP_BUDGET))

    @classmethod
    def get_path_block_size(cls) -> int:
        """Get the increment block size from environment or default"""
        return int(os.getenv("LEVY_PATH_BLOCK_SIZE", cls.PATH_BLOCK_SIZE))

    @classmethod
    def get_rejection_x0(cls) -> float:
        """Get the rejection sampler start level from environment or default"""
        return float(os.getenv("LEVY_REJECTION_X0", cls.REJECTION_X0))

    @classmethod
    def get_default_n(cls) -> int:
        """Get the default sample count from environment or default"""
        return int(os.getenv("LEVY_DEFAULT_N", cls.DEFAULT_N))

    @classmethod
    def get_default_truncation_level(cls) -> float:
        """Get the default truncation level from environment or default"""
        return float(os.getenv("LEVY_DEFAULT_TRUNCATION_LEVEL", cls.DEFAULT_TRUNCATION_LEVEL))

    @classmethod
    def get_default_workers(cls) -> int:
        """Get the default worker count from environment or default"""
        return int(os.getenv("LEVY_WORKERS", cls.DEFAULT_WORKERS))

    @classmethod
    def get_chunk_size(cls) -> int:
        """Get the per-task sample chunk size from environment or default"""
        return int(os.getenv("LEVY_CHUNK_SIZE", cls.CHUNK_SIZE))

    @classmethod
    def get_min_check_samples(cls) -> int:
        """Get the minimum sample size for identity checks from environment or default"""
        return int(os.getenv("LEVY_MIN_CHECK_SAMPLES", cls.MIN_CHECK_SAMPLES))

    @classmethod
    def get_log_level(cls) -> str:
        """Get log level from environment or default"""
        return os.getenv("LEVY_LOG_LEVEL", cls.LOG_LEVEL).upper()

    @classmethod
    def get_output_dir(cls) -> str:
        """Get output directory from environment or default"""
        return os.getenv("LEVY_OUTPUT_DIR", cls.DEFAULT_OUTPUT_DIR)
