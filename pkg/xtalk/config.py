"""
Configuration module for loading and accessing environment variables and settings.
"""

import logging
import os
from typing import Any, Callable, Dict, Optional, TypeVar

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Get the absolute path to the base directory of the project
BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))

T = TypeVar("T")

DEFAULT_K_MAX = 64
DEFAULT_BOOTSTRAP_RESAMPLES = 200
DEFAULT_VALIDITY_WARN = 0.05
DEFAULT_VALIDITY_FAIL = 0.15
DEFAULT_WORKERS = 1
DEFAULT_LM_MAX_ITERATIONS = 200
DEFAULT_LM_DAMPING = 1e-3


class ConfigError(Exception):
    """Exception raised for configuration errors."""
    pass


class Config:
    """
    Configuration manager for the Xtalk toolkit.
    Handles environment variables and provides typed access to tunables.
    """

    _config_data = None

    @classmethod
    def _load_config(cls) -> Dict[str, Any]:
        """
        Load configuration from .env file or environment variables.

        Returns:
            Dict with configuration parameters
        """
        if cls._config_data is None:

            env_file = os.environ.get("XTALK_ENV_FILE", ".env")

            # Relative paths are resolved against the project root
            if not os.path.isabs(env_file):
                env_file = os.path.join(BASE_DIR, env_file)

            logger.debug(f"Loading configuration from {env_file}")

            if os.path.exists(env_file):
                load_dotenv(env_file)
            else:
                logger.debug(f".env file not found at {env_file}, using environment variables only")

            cls._config_data = dict(os.environ)

        return cls._config_data

    @classmethod
    def reset(cls) -> None:
        """Forget the cached configuration so the next access reloads it."""
        cls._config_data = None

    @classmethod
    def get(cls, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: Configuration key
            default: Default value if key is not found

        Returns:
            Configuration value or default
        """
        config = cls._load_config()
        return config.get(key, default)

    @classmethod
    def _get_typed(cls, key: str, default: T, convert: Callable[[str], T]) -> T:
        raw: Optional[str] = cls.get(key)
        if raw is None or raw == "":
            return default
        try:
            return convert(raw)
        except ValueError as e:
            logger.error(f"Invalid value for {key}: {raw!r}")
            raise ConfigError(f"{key} must be a {convert.__name__}, got {raw!r}") from e

    @classmethod
    def get_histogram_settings(cls) -> Dict[str, int]:
        """
        Get histogram settings.

        Returns:
            Dict with the hard cap on photocounts per trigger

        Raises:
            ConfigError: If XTALK_K_MAX is not a positive integer
        """
        k_max = cls._get_typed("XTALK_K_MAX", DEFAULT_K_MAX, int)
        if k_max < 1:
            raise ConfigError(f"XTALK_K_MAX must be positive, got {k_max}")
        return {"k_max": k_max}

    @classmethod
    def get_bootstrap_settings(cls) -> Dict[str, int]:
        """Get bootstrap settings."""
        return {
            "resamples": cls._get_typed(
                "XTALK_BOOTSTRAP_RESAMPLES", DEFAULT_BOOTSTRAP_RESAMPLES, int
            ),
        }

    @classmethod
    def get_validity_thresholds(cls) -> Dict[str, float]:
        """
        Get the thresholds for the model-validity ratio.

        Returns:
            Dict with "warn" and "fail" thresholds

        Raises:
            ConfigError: If the thresholds are not increasing
        """
        warn = cls._get_typed("XTALK_VALIDITY_WARN", DEFAULT_VALIDITY_WARN, float)
        fail = cls._get_typed("XTALK_VALIDITY_FAIL", DEFAULT_VALIDITY_FAIL, float)
        if not 0 <= warn <= fail:
            raise ConfigError(
                f"Validity thresholds must satisfy 0 <= warn <= fail, got {warn}, {fail}"
            )
        return {"warn": warn, "fail": fail}

    @classmethod
    def get_simulation_settings(cls) -> Dict[str, int]:
        """Get simulator settings."""
        workers = cls._get_typed("XTALK_WORKERS", DEFAULT_WORKERS, int)
        if workers < 1:
            raise ConfigError(f"XTALK_WORKERS must be positive, got {workers}")
        return {"workers": workers}

    @classmethod
    def get_fit_settings(cls) -> Dict[str, Any]:
        """Get Levenberg-Marquardt settings."""
        return {
            "max_iterations": cls._get_typed(
                "XTALK_LM_MAX_ITERATIONS", DEFAULT_LM_MAX_ITERATIONS, int
            ),
            "damping": cls._get_typed("XTALK_LM_DAMPING", DEFAULT_LM_DAMPING, float),
        }
