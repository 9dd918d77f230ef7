"""Configuration module for loading and validating environment variables."""

import os
import logging
from dataclasses import dataclass
from pathlib import Path
from dotenv import load_dotenv

logger = logging.getLogger(__name__)


@dataclass
class Config:
    """Process-level settings for the experiment runner, loaded from environment variables."""

    debug_mode: bool

    # Output
    out_dir: str
    db_path: str

    # Execution
    workers: int
    master_seed: int

    # Time quadrature defaults
    norm_rtol: float
    nt_start: int
    nt_cap: int

    # NLS
    blowup_ceiling: float

    # Report cache
    cache_enabled: bool
    cache_ttl_minutes: int

    @classmethod
    def from_env(cls) -> "Config":
        """
        Load configuration from environment variables.

        Returns:
            Config: Configuration instance with loaded values

        Raises:
            ValueError: If environment variables are set to invalid values
        """
        # Load .env file if it exists
        load_dotenv()

        debug_mode = cls._get_bool_env("DEBUG_MODE", default=False)
        out_dir = os.getenv("OUT_DIR", "results")
        db_path = os.getenv("DB_PATH", str(Path(out_dir) / "runs.db"))
        workers = cls._get_int_env("WORKERS", default=1)
        master_seed = cls._get_int_env("MASTER_SEED", default=0)
        norm_rtol = cls._get_float_env("NORM_RTOL", default=5e-3)
        nt_start = cls._get_int_env("NT_START", default=64)
        nt_cap = cls._get_int_env("NT_CAP", default=2**20)
        blowup_ceiling = cls._get_float_env("BLOWUP_CEILING", default=1e6)
        cache_enabled = cls._get_bool_env("CACHE_ENABLED", default=True)
        cache_ttl_minutes = cls._get_int_env("CACHE_TTL_MINUTES", default=1440)

        cls._validate_positive("WORKERS", workers)
        cls._validate_positive("NORM_RTOL", norm_rtol)
        cls._validate_positive("NT_START", nt_start)
        cls._validate_positive("BLOWUP_CEILING", blowup_ceiling)
        cls._validate_positive("CACHE_TTL_MINUTES", cache_ttl_minutes)
        if master_seed < 0:
            raise ValueError(f"Parameter 'MASTER_SEED' must be non-negative, got: {master_seed}")
        if nt_cap < nt_start:
            raise ValueError(
                f"Parameter 'NT_CAP' must be at least NT_START ({nt_start}), got: {nt_cap}"
            )

        return cls(
            debug_mode=debug_mode,
            out_dir=out_dir,
            db_path=db_path,
            workers=workers,
            master_seed=master_seed,
            norm_rtol=norm_rtol,
            nt_start=nt_start,
            nt_cap=nt_cap,
            blowup_ceiling=blowup_ceiling,
            cache_enabled=cache_enabled,
            cache_ttl_minutes=cache_ttl_minutes,
        )

    @staticmethod
    def _get_int_env(key: str, default: int) -> int:
        """
        Get optional integer environment variable with default.

        Args:
            key: Environment variable name
            default: Default value if not set

        Returns:
            int: Environment variable value as integer or default

        Raises:
            ValueError: If environment variable is set but not a valid integer
        """
        value = os.getenv(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ValueError(f"Environment variable '{key}' must be a valid integer, got: {value}")

    @staticmethod
    def _get_float_env(key: str, default: float) -> float:
        """
        Get optional float environment variable with default.

        Raises:
            ValueError: If environment variable is set but not a valid number
        """
        value = os.getenv(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"Environment variable '{key}' must be a valid number, got: {value}")

    @staticmethod
    def _get_bool_env(key: str, default: bool) -> bool:
        """
        Get optional boolean environment variable with default.

        Args:
            key: Environment variable name
            default: Default value if not set

        Returns:
            bool: Environment variable value as boolean or default
        """
        value = os.getenv(key)
        if value is None:
            return default
        return value.lower() in ("true", "1", "yes", "on")

    @staticmethod
    def _validate_positive(key: str, value: float) -> None:
        """
        Validate that a value is positive.

        Raises:
            ValueError: If value is not positive
        """
        if value <= 0:
            raise ValueError(f"Parameter '{key}' must be positive, got: {value}")
