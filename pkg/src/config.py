"""
Environment-driven defaults for the command-line front end.

Values come from the process environment, optionally seeded from a .env file.
Explicit command-line flags always take precedence over these settings.
"""

import logging
import os
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, TypeVar

from dotenv import load_dotenv

from src.models.errors import ConfigurationError
from src.models.frame_grid import DEFAULT_HOP, DEFAULT_SAMPLE_RATE, FrameGrid
from src.services.bottleneck_service import DEFAULT_LAMBDA, BottleneckConfig

T = TypeVar("T")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _read(env: Mapping[str, str], name: str, default: T, convert: Callable[[str], T]) -> T:
    raw = env.get(name, "").strip()
    if not raw:
        return default
    try:
        return convert(raw)
    except ValueError:
        raise ConfigurationError(f"environment variable {name}={raw!r} is not a valid value") from None


@dataclass(frozen=True)
class StylekitSettings:
    """Defaults for sample rate, hop, lambda, log level and worker count."""
    sample_rate: int = DEFAULT_SAMPLE_RATE
    hop: int = DEFAULT_HOP
    lambda_: float = DEFAULT_LAMBDA
    log_level: str = "WARNING"
    jobs: int = 1

    def __post_init__(self):
        """Validate settings after initialization."""
        if self.log_level not in LOG_LEVELS:
            raise ConfigurationError(f"log level must be one of {', '.join(LOG_LEVELS)}, got {self.log_level}")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1, got {self.jobs}")
        try:
            FrameGrid(self.sample_rate, self.hop)
        except ValueError as e:
            raise ConfigurationError(str(e)) from None
        BottleneckConfig(lambda_=self.lambda_)

    @property
    def grid(self) -> FrameGrid:
        """Default frame grid."""
        return FrameGrid(self.sample_rate, self.hop)

    @classmethod
    def from_env(cls, env: Optional[Mapping[str, str]] = None, dotenv: bool = True) -> "StylekitSettings":
        """
        Build settings from environment variables.

        Args:
            env: Mapping to read instead of os.environ
            dotenv: Load a .env file from the working directory first

        Raises:
            ConfigurationError: On malformed values
        """
        if env is None:
            if dotenv:
                load_dotenv()
            env = os.environ
        settings = cls(
            sample_rate=_read(env, "STYLEKIT_SAMPLE_RATE", DEFAULT_SAMPLE_RATE, int),
            hop=_read(env, "STYLEKIT_HOP", DEFAULT_HOP, int),
            lambda_=_read(env, "STYLEKIT_LAMBDA", DEFAULT_LAMBDA, float),
            log_level=_read(env, "STYLEKIT_LOG_LEVEL", "WARNING", str.upper),
            jobs=_read(env, "STYLEKIT_JOBS", 1, int),
        )
        logging.getLogger(__name__).debug("settings: %s", settings)
        return settings
