"""
Measurement oracles: vibrato rate and depth from F0 contours, band energies
from audio.

Nothing here reuses the pitch-dynamics or band-completion code, so the
measurements can be used to check those modules.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import librosa
import numpy as np
from scipy import signal

from src.models.errors import ValidationError
from src.models.signals import AudioBuffer, F0Contour

logger = logging.getLogger(__name__)

ENERGY_FLOOR_DB = -120.0
MIN_VIBRATO_RATE_HZ = 3.0
MAX_VIBRATO_RATE_HZ = 20.0
# Normalized autocorrelation a peak must reach to count as periodic.
PEAK_THRESHOLD = 0.3


@dataclass(frozen=True)
class VibratoEstimate:
    """Measured vibrato: rate in Hz, depth in cents, number of frames used."""
    rate_hz: float
    depth_cents: float
    frames_analyzed: int

    def __post_init__(self):
        """Validate the estimate after initialization."""
        if self.rate_hz < 0 or self.depth_cents < 0:
            raise ValidationError("vibrato rate and depth must be >= 0")


def third_octave_bands(lo_hz: float, hi_hz: float) -> List[Tuple[float, float]]:
    """
    Base-two third-octave bands around 1 kHz lying entirely inside [lo_hz, hi_hz].

    Returns:
        List of (lower edge, upper edge) pairs in ascending order
    """
    bands = []
    for k in range(-30, 31):
        center = 1000.0 * 2.0 ** (k / 3)
        low, high = center * 2.0 ** (-1 / 6), center * 2.0 ** (1 / 6)
        if low >= lo_hz and high <= hi_hz:
            bands.append((low, high))
    return bands


class AnalysisService:
    """
    Service measuring contours and audio.

    Single Responsibility: Independent estimators used to verify outputs.
    """

    def estimate_vibrato(self, f0: F0Contour, span: Tuple[int, int]) -> VibratoEstimate:
        """
        Estimate vibrato over a frame span.

        The span is converted to cents around its median. The rate is the lag of
        the strongest autocorrelation peak between 3 and 20 Hz, refined by
        parabolic interpolation; no peak above threshold gives rate 0. The depth
        is half the peak-to-peak deviation after a 3-point median filter.

        Args:
            f0: Contour to analyze
            span: Half-open frame interval (start, stop)

        Returns:
            VibratoEstimate

        Raises:
            ValidationError: If the span is out of range, holds unvoiced
                frames, or covers less than two periods at 3 Hz
        """
        start, stop = int(span[0]), int(span[1])
        if not 0 <= start < stop <= f0.n_frames:
            raise ValidationError(f"span [{start}, {stop}) outside contour of {f0.n_frames} frames")
        values = f0.values[start:stop]
        if not np.all(f0.voiced[start:stop]):
            frame = start + int(np.flatnonzero(~f0.voiced[start:stop])[0])
            raise ValidationError(f"span holds unvoiced frame {frame}")

        frame_rate = f0.grid.sample_rate / f0.grid.hop
        needed = math.ceil(2 * frame_rate / MIN_VIBRATO_RATE_HZ)
        if stop - start < needed:
            raise ValidationError(
                f"span of {stop - start} frames is shorter than two periods at {MIN_VIBRATO_RATE_HZ:g} Hz ({needed} frames)"
            )

        cents = 1200.0 * np.log2(values / np.median(values))
        smoothed = signal.medfilt(cents, kernel_size=3)
        depth = float(smoothed.max() - smoothed.min()) / 2.0

        return VibratoEstimate(self._dominant_rate(cents, frame_rate), depth, stop - start)

    def _dominant_rate(self, cents: np.ndarray, frame_rate: float) -> float:
        centered = cents - cents.mean()
        acf = librosa.autocorrelate(centered)
        if acf[0] <= 1e-12:
            return 0.0
        acf = acf / acf[0]

        min_lag = max(1, int(math.floor(frame_rate / MAX_VIBRATO_RATE_HZ)))
        max_lag = min(acf.shape[0] - 2, int(math.ceil(frame_rate / MIN_VIBRATO_RATE_HZ)))
        peaks, props = signal.find_peaks(acf[: max_lag + 2], height=PEAK_THRESHOLD)
        keep = (peaks >= min_lag) & (peaks <= max_lag)
        if not np.any(keep):
            return 0.0
        peaks, heights = peaks[keep], props["peak_heights"][keep]
        lag = int(peaks[np.argmax(heights)])

        left, mid, right = acf[lag - 1], acf[lag], acf[lag + 1]
        curvature = left - 2 * mid + right
        offset = 0.5 * (left - right) / curvature if curvature < 0 else 0.0
        return float(frame_rate / (lag + offset))

    def _one_sided_power(self, x: AudioBuffer) -> Tuple[np.ndarray, np.ndarray]:
        n = len(x)
        window = signal.get_window("hann", n)
        spectrum = np.fft.rfft(x.samples * window)
        power = np.abs(spectrum) ** 2
        # rfft keeps DC once and, for even n, Nyquist once; every other bin stands for two
        power[1: (n + 1) // 2] *= 2.0
        power /= n * np.mean(window ** 2)
        freqs = np.fft.rfftfreq(n, d=1.0 / x.sample_rate)
        return freqs, power

    def band_energy(self, x: AudioBuffer, lo_hz: float, hi_hz: float) -> float:
        """
        Linear energy in [lo_hz, hi_hz), on the scale of sum(x**2).

        The Nyquist bin is included when hi_hz equals the Nyquist frequency.

        Raises:
            ValidationError: On an invalid band
        """
        nyquist = x.sample_rate / 2
        if not (math.isfinite(lo_hz) and math.isfinite(hi_hz) and 0 <= lo_hz < hi_hz <= nyquist):
            raise ValidationError(f"invalid band [{lo_hz}, {hi_hz}) for Nyquist {nyquist:g} Hz")
        if len(x) < 2:
            return float(np.sum(x.samples ** 2)) if lo_hz == 0 else 0.0
        freqs, power = self._one_sided_power(x)
        selected = (freqs >= lo_hz) & (freqs < hi_hz)
        if hi_hz == nyquist:
            selected |= freqs == nyquist
        return float(power[selected].sum())

    def band_energy_db(self, x: AudioBuffer, lo_hz: float, hi_hz: float) -> float:
        """
        Band energy in dB via a Hann-windowed FFT of the whole buffer.

        Returns:
            10*log10 of the band energy, floored at -120 dB

        Raises:
            ValidationError: On an invalid band
        """
        return self.to_db(self.band_energy(x, lo_hz, hi_hz))

    def energy_db(self, x: AudioBuffer) -> float:
        """Total energy sum(x**2) in dB, floored at -120 dB."""
        return self.to_db(float(np.sum(x.samples ** 2)))

    def tone_amplitude(self, x: AudioBuffer, freq_hz: float, half_width_hz: float = 50.0) -> float:
        """
        Amplitude of a stationary sinusoid, from the energy around its frequency.
        """
        lo = max(0.0, freq_hz - half_width_hz)
        hi = min(x.sample_rate / 2, freq_hz + half_width_hz)
        if len(x) == 0:
            return 0.0
        return math.sqrt(2.0 * self.band_energy(x, lo, hi) / len(x))

    @staticmethod
    def to_db(energy: float) -> float:
        """10*log10 with the -120 dB floor."""
        if energy <= 0:
            return ENERGY_FLOOR_DB
        return max(ENERGY_FLOOR_DB, 10.0 * math.log10(energy))
