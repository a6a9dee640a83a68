"""
Frame grid shared by every frame-level structure.

A grid is a sample rate plus a hop size; frame n is stamped at n * hop / sample_rate.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.models.errors import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE = 24000
DEFAULT_HOP = 256

# Absorbs float noise when a time lands exactly on a frame boundary.
FRAME_EPSILON = 1e-9


@dataclass(frozen=True)
class FrameGrid:
    """
    Time to frame mapping.

    Single Responsibility: Owns the seconds <-> frame arithmetic.
    """
    sample_rate: int = DEFAULT_SAMPLE_RATE
    hop: int = DEFAULT_HOP

    def __post_init__(self):
        """Validate grid parameters after initialization."""
        for name in ("sample_rate", "hop"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"FrameGrid {name} must be an integer, got {value!r}")
            if value < 1:
                raise ValidationError(f"FrameGrid {name} must be >= 1, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def frame_duration(self) -> float:
        """Seconds covered by one frame."""
        return self.hop / self.sample_rate

    @property
    def nyquist(self) -> float:
        """Half the sample rate, the upper bound for any F0 value."""
        return self.sample_rate / 2.0

    def seconds_to_frames(self, seconds: float) -> float:
        """Fractional frame position of a time stamp."""
        return seconds * self.sample_rate / self.hop

    def frame_times(self, n_frames: int) -> np.ndarray:
        """
        Time stamps of the first n frames.

        Args:
            n_frames: Number of frames

        Returns:
            Array of n_frames times in seconds
        """
        return np.arange(n_frames, dtype=np.float64) * self.hop / self.sample_rate

    def frame_count(self, duration_seconds: float) -> int:
        """Number of whole frames needed to cover a duration."""
        return int(math.ceil(self.seconds_to_frames(duration_seconds) - FRAME_EPSILON))


def seconds_to_frame_span(start: float, end: float, grid: FrameGrid) -> Tuple[int, int]:
    """
    Convert a time interval to a half-open frame interval [a, b).

    The span is never empty: sub-frame intervals are widened to one frame.

    Args:
        start: Start time in seconds
        end: End time in seconds
        grid: Frame grid

    Returns:
        Tuple (a, b) with b > a

    Raises:
        ValidationError: If times are non-finite, negative or not increasing
    """
    if not (math.isfinite(start) and math.isfinite(end)):
        raise ValidationError(f"time span must be finite, got ({start}, {end})")
    if start < 0 or end < 0:
        raise ValidationError(f"time span must be non-negative, got ({start}, {end})")
    if end <= start:
        raise ValidationError(f"time span end must exceed start, got ({start}, {end})")

    a = math.floor(grid.seconds_to_frames(start) + FRAME_EPSILON)
    b = math.floor(grid.seconds_to_frames(end) + FRAME_EPSILON)
    if b <= a:
        logger.debug("span [%.6f, %.6f) s shorter than a frame, widened to frame %d", start, end, a)
        b = a + 1
    return a, b
