"""
High-frequency band completion.

The 24 kHz main output is upsampled to 48 kHz and the content of an auxiliary
48 kHz source above the cutoff is added on top. The high band is isolated with
a real-valued STFT bin mask whose edge is a raised-cosine cross-fade.
"""

import logging
import math
from dataclasses import dataclass

import librosa
import numpy as np
from scipy import signal

from src.models.errors import ConfigurationError, DurationMismatchError, RateMismatchError
from src.models.signals import AudioBuffer

logger = logging.getLogger(__name__)

MAIN_RATE = 24000
SOURCE_RATE = 48000
DURATION_TOLERANCE_SECONDS = 0.05

# Interpolation filter for 24 -> 48 kHz: 129/128 taps per phase, 80 dB stopband from 13 kHz.
UPSAMPLE_TAPS = 257
UPSAMPLE_CUTOFF_HZ = 12000.0
UPSAMPLE_ATTENUATION_DB = 80.0


@dataclass(frozen=True)
class BandCompletionConfig:
    """
    Cross-fade and STFT settings of the band merge.

    The mask rises from 0 at cutoff - crossfade/2 to 1 at cutoff + crossfade/2.
    """
    cutoff_hz: float = 10000.0
    crossfade_hz: float = 1000.0
    fft_size: int = 2048
    hop: int = 512
    window: str = "hann"

    def __post_init__(self):
        """Validate settings after initialization."""
        if not (math.isfinite(self.cutoff_hz) and math.isfinite(self.crossfade_hz)):
            raise ConfigurationError("cutoff and crossfade must be finite")
        if self.crossfade_hz <= 0:
            raise ConfigurationError(f"crossfade must be > 0 Hz, got {self.crossfade_hz}")
        if not (0 < self.band_low_hz and self.band_high_hz < SOURCE_RATE / 2):
            raise ConfigurationError(
                f"transition band {self.band_low_hz:g}-{self.band_high_hz:g} Hz must lie inside "
                f"0-{SOURCE_RATE // 2} Hz"
            )
        if not isinstance(self.fft_size, int) or self.fft_size < 2 or self.fft_size & (self.fft_size - 1):
            raise ConfigurationError(f"fft size must be a power of two, got {self.fft_size}")
        if not isinstance(self.hop, int) or not 0 < self.hop <= self.fft_size:
            raise ConfigurationError(f"hop must be in 1..{self.fft_size}, got {self.hop}")
        try:
            cola = signal.check_COLA(self.window, self.fft_size, self.fft_size - self.hop, tol=1e-6)
        except ValueError as e:
            raise ConfigurationError(f"invalid window '{self.window}': {e}") from None
        if not cola:
            raise ConfigurationError(
                f"window '{self.window}' with hop {self.hop} is not constant overlap-add at fft size {self.fft_size}"
            )

    @property
    def band_low_hz(self) -> float:
        """Lower edge of the transition band."""
        return self.cutoff_hz - self.crossfade_hz / 2

    @property
    def band_high_hz(self) -> float:
        """Upper edge of the transition band."""
        return self.cutoff_hz + self.crossfade_hz / 2


def _require_rate(buffer: AudioBuffer, rate: int, what: str) -> None:
    if buffer.sample_rate != rate:
        raise RateMismatchError(f"{what} must be sampled at {rate} Hz, got {buffer.sample_rate} Hz")


class BandCompletionService:
    """
    Service merging the upsampled main output with the source's high band.

    Single Responsibility: Resampling, spectral masking and band summation.
    """

    def __init__(self):
        """Design the interpolation filter once."""
        beta = signal.kaiser_beta(UPSAMPLE_ATTENUATION_DB)
        self._interpolator = signal.firwin(
            UPSAMPLE_TAPS, UPSAMPLE_CUTOFF_HZ, window=("kaiser", beta), fs=SOURCE_RATE
        )

    def upsample_2x(self, x: AudioBuffer) -> AudioBuffer:
        """
        Polyphase windowed-sinc interpolation from 24 kHz to 48 kHz.

        Raises:
            RateMismatchError: If the input is not at 24 kHz
        """
        _require_rate(x, MAIN_RATE, "upsampler input")
        if len(x) == 0:
            return AudioBuffer(np.zeros(0), SOURCE_RATE)
        # resample_poly scales the filter by the up factor itself
        y = signal.resample_poly(x.samples, 2, 1, window=self._interpolator)
        return AudioBuffer(y, SOURCE_RATE)

    def transition_mask(self, config: BandCompletionConfig) -> np.ndarray:
        """
        High-pass gain per STFT bin.

        Returns:
            Array of fft_size // 2 + 1 gains in [0, 1]
        """
        freqs = librosa.fft_frequencies(sr=SOURCE_RATE, n_fft=config.fft_size)
        ramp = np.clip((freqs - config.band_low_hz) / config.crossfade_hz, 0.0, 1.0)
        return 0.5 * (1.0 - np.cos(np.pi * ramp))

    def _apply_mask(self, x: AudioBuffer, gains: np.ndarray, config: BandCompletionConfig) -> AudioBuffer:
        _require_rate(x, SOURCE_RATE, "band filter input")
        if len(x) == 0:
            return AudioBuffer(np.zeros(0), SOURCE_RATE)
        spectrum = librosa.stft(
            x.samples, n_fft=config.fft_size, hop_length=config.hop, window=config.window, center=True
        )
        masked = spectrum * gains[:, np.newaxis]
        y = librosa.istft(
            masked, hop_length=config.hop, n_fft=config.fft_size, window=config.window,
            center=True, length=len(x),
        )
        return AudioBuffer(y.astype(np.float64), SOURCE_RATE)

    def highpass_extract(self, x: AudioBuffer, config: BandCompletionConfig) -> AudioBuffer:
        """
        Content of a 48 kHz buffer above the cutoff.

        Args:
            x: 48 kHz input
            config: Cross-fade and STFT settings

        Returns:
            Buffer of the same length holding the high band

        Raises:
            RateMismatchError: If the input is not at 48 kHz
        """
        return self._apply_mask(x, self.transition_mask(config), config)

    def lowpass_extract(self, x: AudioBuffer, config: BandCompletionConfig) -> AudioBuffer:
        """Complement of highpass_extract: content below the cutoff."""
        return self._apply_mask(x, 1.0 - self.transition_mask(config), config)

    def band_complete(self, x24: AudioBuffer, x48_src: AudioBuffer, config: BandCompletionConfig) -> AudioBuffer:
        """
        x48 = upsample_2x(x24) + highpass_extract(x48_src).

        Both branches are truncated to the shorter length; no gain is applied.

        Raises:
            RateMismatchError: If x24 is not at 24 kHz or x48_src not at 48 kHz
            DurationMismatchError: If the durations differ by more than 50 ms
        """
        _require_rate(x24, MAIN_RATE, "main output")
        _require_rate(x48_src, SOURCE_RATE, "auxiliary source")
        gap = abs(x24.duration - x48_src.duration)
        if gap > DURATION_TOLERANCE_SECONDS + 1e-12:
            raise DurationMismatchError(
                f"main output lasts {x24.duration:.3f} s, auxiliary source {x48_src.duration:.3f} s "
                f"(tolerance {DURATION_TOLERANCE_SECONDS * 1000:.0f} ms)"
            )

        low = self.upsample_2x(x24).samples
        high = self.highpass_extract(x48_src, config).samples
        n = min(low.shape[0], high.shape[0])
        if low.shape[0] != high.shape[0]:
            logger.debug("truncating band branches to %d samples (%d vs %d)", n, low.shape[0], high.shape[0])
        return AudioBuffer(low[:n] + high[:n], SOURCE_RATE)
