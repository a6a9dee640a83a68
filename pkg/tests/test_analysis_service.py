"""
Tests for AnalysisService.
"""

import numpy as np
import pytest

from src.models.errors import ValidationError
from src.models.frame_grid import FrameGrid
from src.models.signals import AudioBuffer, F0Contour
from src.services.analysis_service import AnalysisService, ENERGY_FLOOR_DB, VibratoEstimate, third_octave_bands
from tests.test_config import flat_contour, sine, white_noise

GRID = FrameGrid(24000, 256)


def _vibrato_contour(depth: float, rate: float, seconds: float, base: float = 440.0) -> F0Contour:
    n = GRID.frame_count(seconds)
    t = GRID.frame_times(n)
    return F0Contour.from_values(base * 2.0 ** (depth * np.sin(2 * np.pi * rate * t) / 1200.0), GRID)


@pytest.fixture
def service():
    return AnalysisService()


class TestVibratoEstimate:
    """Test cases for AnalysisService.estimate_vibrato."""

    @pytest.mark.parametrize("depth,rate", [(50.0, 5.0), (100.0, 6.0), (30.0, 7.5)])
    def test_recovers_rate_and_depth(self, service, depth, rate):
        """Test synthetic vibrato is measured within 0.2 Hz and 5 cents."""
        f0 = _vibrato_contour(depth, rate, 3.0)
        estimate = service.estimate_vibrato(f0, (0, f0.n_frames))
        assert estimate.rate_hz == pytest.approx(rate, abs=0.2)
        assert estimate.depth_cents == pytest.approx(depth, abs=5.0)
        assert estimate.frames_analyzed == f0.n_frames

    def test_flat_contour(self, service):
        """Test a flat contour has no vibrato."""
        estimate = service.estimate_vibrato(flat_contour(300.0, 200, GRID), (0, 200))
        assert estimate == VibratoEstimate(0.0, 0.0, 200)

    def test_sub_span(self, service):
        """Test only the requested frames are analyzed."""
        values = np.full(400, 220.0)
        values[100:300] = _vibrato_contour(80.0, 5.5, 5.0).values[:200] / 2.0
        estimate = service.estimate_vibrato(F0Contour.from_values(values, GRID), (100, 300))
        assert estimate.rate_hz == pytest.approx(5.5, abs=0.2)
        assert estimate.frames_analyzed == 200

    def test_unvoiced_frame_in_span(self, service):
        """Test an unvoiced frame is reported by index."""
        values = np.full(200, 300.0)
        values[150] = 0.0
        with pytest.raises(ValidationError, match="150"):
            service.estimate_vibrato(F0Contour.from_values(values, GRID), (0, 200))

    def test_span_too_short(self, service):
        """Test spans under two periods at 3 Hz are rejected."""
        with pytest.raises(ValidationError, match="63"):
            service.estimate_vibrato(flat_contour(300.0, 100, GRID), (0, 62))

    @pytest.mark.parametrize("span", [(-1, 50), (50, 50), (0, 201)])
    def test_span_out_of_range(self, service, span):
        """Test spans outside the contour are rejected."""
        with pytest.raises(ValidationError):
            service.estimate_vibrato(flat_contour(300.0, 200, GRID), span)


class TestBandEnergy:
    """Test cases for AnalysisService band energy measurements."""

    def test_bin_centered_tone(self, service):
        """Test a bin-centered tone puts all its energy in its band."""
        x = sine(1000.0, 1.0, 48000, 0.5)
        total = float(np.sum(x.samples ** 2))
        assert service.band_energy(x, 900.0, 1100.0) == pytest.approx(total, rel=1e-9)
        assert service.band_energy(x, 2000.0, 24000.0) == pytest.approx(0.0, abs=1e-9)
        assert service.tone_amplitude(x, 1000.0) == pytest.approx(0.5, rel=1e-9)

    def test_nyquist_bin_included(self, service):
        """Test a Nyquist-rate tone is counted when the band ends at Nyquist."""
        x = AudioBuffer(np.tile([1.0, -1.0], 2400), 48000)
        assert service.band_energy(x, 20000.0, 24000.0) == pytest.approx(4800.0, rel=1e-9)
        assert service.band_energy(x, 0.0, 20000.0) == pytest.approx(0.0, abs=1e-9)

    def test_noise_energy_matches_time_domain(self, service):
        """Test the full band matches sum(x**2) for white noise within 0.2 dB."""
        x = white_noise(1.0, 48000, seed=11)
        assert service.band_energy_db(x, 0.0, 24000.0) == pytest.approx(service.energy_db(x), abs=0.2)

    def test_silence_floor(self, service):
        """Test silence is floored at -120 dB."""
        x = AudioBuffer(np.zeros(4800), 48000)
        assert service.energy_db(x) == ENERGY_FLOOR_DB
        assert service.band_energy_db(x, 100.0, 200.0) == ENERGY_FLOOR_DB

    def test_to_db(self, service):
        """Test the dB conversion and its floor."""
        assert service.to_db(1.0) == 0.0
        assert service.to_db(100.0) == pytest.approx(20.0)
        assert service.to_db(1e-20) == ENERGY_FLOOR_DB

    def test_one_sample_buffer(self, service):
        """Test single-sample buffers fall back to the time-domain energy."""
        x = AudioBuffer(np.array([0.5]), 48000)
        assert service.band_energy(x, 0.0, 1000.0) == 0.25
        assert service.band_energy(x, 1000.0, 2000.0) == 0.0

    @pytest.mark.parametrize("band", [(200.0, 100.0), (0.0, 30000.0), (-1.0, 10.0), (0.0, float("nan"))])
    def test_invalid_band(self, service, band):
        """Test inverted, negative and above-Nyquist bands are rejected."""
        with pytest.raises(ValidationError):
            service.band_energy(AudioBuffer(np.zeros(100), 48000), *band)


class TestThirdOctaveBands:
    """Test cases for third_octave_bands."""

    def test_bands_inside_range(self):
        """Test every band lies inside the range and bands are contiguous."""
        bands = third_octave_bands(100.0, 9500.0)
        assert all(100.0 <= lo < hi <= 9500.0 for lo, hi in bands)
        for (_, hi), (lo, _) in zip(bands, bands[1:]):
            assert lo == pytest.approx(hi)

    def test_1khz_band(self):
        """Test the band centered on 1 kHz is present."""
        bands = third_octave_bands(800.0, 1200.0)
        assert len(bands) == 1
        lo, hi = bands[0]
        assert np.sqrt(lo * hi) == pytest.approx(1000.0)
