"""
Numeric signal types: F0 contours, frame-level feature matrices and audio buffers.

Arrays are copied to float64 on construction and frozen read-only.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.models.errors import ValidationError
from src.models.frame_grid import FrameGrid


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class F0Contour:
    """
    Per-frame fundamental frequency with voicing flags.

    0.0 Hz encodes an unvoiced frame.
    """
    values: np.ndarray
    voiced: np.ndarray
    grid: FrameGrid = field(default_factory=FrameGrid)

    def __post_init__(self):
        """Validate the contour after initialization."""
        values = np.asarray(self.values, dtype=np.float64)
        voiced = np.asarray(self.voiced, dtype=bool)
        if values.ndim != 1 or voiced.ndim != 1:
            raise ValidationError("F0 values and voicing flags must be one-dimensional")
        if values.shape != voiced.shape:
            raise ValidationError(
                f"F0 has {values.shape[0]} values but {voiced.shape[0]} voicing flags"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("F0 values must be finite")
        if np.any(values < 0):
            raise ValidationError(f"F0 values must be >= 0, found {values.min()}")
        if np.any((values > 0) != voiced):
            frame = int(np.flatnonzero((values > 0) != voiced)[0])
            raise ValidationError(f"F0 voicing flag disagrees with value at frame {frame}")
        if np.any(values >= self.grid.nyquist):
            raise ValidationError(
                f"F0 value {values.max()} Hz is not below Nyquist ({self.grid.nyquist} Hz)"
            )
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "voiced", _frozen(voiced))

    @classmethod
    def from_values(cls, values, grid: Optional[FrameGrid] = None) -> "F0Contour":
        """Build a contour deriving voicing from the values (0 means unvoiced)."""
        values = np.asarray(values, dtype=np.float64)
        return cls(values, values > 0, grid or FrameGrid())

    @property
    def n_frames(self) -> int:
        """Number of frames."""
        return int(self.values.shape[0])

    def with_values(self, values: np.ndarray) -> "F0Contour":
        """Same voicing and grid, new values."""
        return F0Contour(values, self.voiced, self.grid)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """
    Frame-level feature rows, shape (n_frames, dim).

    Single Responsibility: Holds the semantic features fed to the bottleneck.
    """
    data: np.ndarray

    def __post_init__(self):
        """Validate the matrix after initialization."""
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got {data.ndim}-D")
        if data.shape[1] < 1:
            raise ValidationError("feature dimension must be >= 1")
        if not np.all(np.isfinite(data)):
            raise ValidationError("feature values must be finite")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def empty(cls, dim: int) -> "FeatureMatrix":
        """Zero-frame matrix of the given dimension."""
        return cls(np.zeros((0, dim)))

    @property
    def n_frames(self) -> int:
        """Number of rows."""
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        """Number of columns."""
        return int(self.data.shape[1])


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono samples at a sample rate, nominal range [-1, 1]."""
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        """Validate the buffer after initialization."""
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValidationError(f"audio buffer must be mono (1-D), got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("audio samples must be finite")
        if isinstance(self.sample_rate, bool) or not isinstance(self.sample_rate, (int, np.integer)):
            raise ValidationError(f"sample rate must be an integer, got {self.sample_rate!r}")
        if self.sample_rate < 1:
            raise ValidationError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self) / self.sample_rate


BIT_FORMATS = ("pcm16", "pcm24", "float32")
SUPPORTED_SAMPLE_RATES = (24000, 48000)


@dataclass(frozen=True)
class WavSpec:
    """Encoding of a mono WAV file."""
    sample_rate: int
    bit_format: str = "float32"
    channels: int = 1

    def __post_init__(self):
        """Validate the WAV format after initialization."""
        if self.bit_format not in BIT_FORMATS:
            raise ValidationError(f"bit format '{self.bit_format}' not one of {', '.join(BIT_FORMATS)}")
        if self.channels != 1:
            raise ValidationError(f"only mono audio is supported, got {self.channels} channels")
        if isinstance(self.sample_rate, bool) or not isinstance(self.sample_rate, (int, np.integer)):
            raise ValidationError(f"sample rate must be an integer, got {self.sample_rate!r}")
        if self.sample_rate < 1:
            raise ValidationError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def is_standard_rate(self) -> bool:
        """True for the 24 kHz and 48 kHz pipeline rates."""
        return self.sample_rate in SUPPORTED_SAMPLE_RATES
