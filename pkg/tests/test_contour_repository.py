"""
Tests for ContourRepository.
"""

import math

import numpy as np
import pytest

from src.models.errors import FormatError, ValidationError
from src.models.frame_grid import FrameGrid
from src.models.signals import F0Contour
from src.repositories.contour_repository import ContourRepository
from src.services.pitch_dynamics_service import PitchDynamicsService, VibratoParams
from tests.test_config import flat_contour, rng


class TestContourRepository:
    """Test cases for ContourRepository class."""

    @pytest.fixture
    def repo(self):
        return ContourRepository()

    def test_parse_f0(self, repo):
        """Test a two-frame contour with one unvoiced frame."""
        contour = repo.parse_f0("#sr=24000 hop=256\n0\n220.0")
        assert contour.values.tolist() == [0.0, 220.0]
        assert contour.voiced.tolist() == [False, True]
        assert contour.grid == FrameGrid(24000, 256)

    def test_missing_header(self, repo):
        """Test a file without header is a format error."""
        with pytest.raises(FormatError, match="header"):
            repo.parse_f0("0\n220.0\n")

    def test_empty_file(self, repo):
        """Test an empty file is a format error."""
        with pytest.raises(FormatError):
            repo.parse_f0("")

    @pytest.mark.parametrize("value,error", [("-1", ValidationError), ("inf", FormatError), ("abc", FormatError), ("1e400", ValidationError), ("12000", ValidationError)])
    def test_invalid_values(self, repo, value, error):
        """Test negative, non-numeric, non-finite and above-Nyquist values are rejected."""
        with pytest.raises(error, match="line 2"):
            repo.parse_f0(f"#sr=24000 hop=256\n{value}\n")

    def test_round_trip_random_contour(self, repo):
        """Test a 1000-frame random contour survives the 9-digit decimal round trip."""
        gen = rng(20)
        values = gen.uniform(50, 1500, 1000)
        values[gen.random(1000) < 0.2] = 0.0
        contour = F0Contour.from_values(values)
        parsed = repo.parse_f0(repo.serialize_f0(contour))
        np.testing.assert_allclose(parsed.values, values, rtol=1e-8)
        np.testing.assert_array_equal(parsed.voiced, contour.voiced)

    def test_serialization_is_canonical(self, repo):
        """Test serialize(parse(x)) reproduces canonical text."""
        text = "#sr=24000 hop=256\n0\n220\n261.625565\n"
        assert repo.serialize_f0(repo.parse_f0(text)) == text

    def test_random_contours_round_trip(self, repo):
        """Test random contours on random grids read back and re-serialize identically."""
        gen = rng(21)
        for _ in range(1000):
            grid = FrameGrid(int(gen.choice([16000, 22050, 24000, 48000])), int(gen.integers(64, 1024)))
            n = int(gen.integers(0, 60))
            values = gen.uniform(0, grid.nyquist, n)
            values[gen.random(n) < 0.2] = 0.0
            values[gen.random(n) < 0.05] = math.nextafter(grid.nyquist, 0.0)
            contour = F0Contour.from_values(values, grid)
            text = repo.serialize_f0(contour)
            parsed = repo.parse_f0(text)
            assert parsed.grid == grid
            np.testing.assert_allclose(parsed.values, values, rtol=1e-8)
            np.testing.assert_array_equal(parsed.voiced, contour.voiced)
            assert repo.serialize_f0(parsed) == text

    def test_midi_track_round_trip(self, repo, tmp_path):
        """Test writing and parsing a MIDI track."""
        grid = FrameGrid(24000, 256)
        path = tmp_path / "midi.txt"
        repo.write_midi_track(path, np.array([0, 60, 60, 0]), grid)
        track, parsed_grid = repo.parse_midi_track(path.read_bytes())
        assert track.tolist() == [0, 60, 60, 0]
        assert parsed_grid == grid

    def test_midi_track_rejects_bad_pitch(self, repo):
        """Test pitches above 127 are rejected."""
        with pytest.raises(FormatError):
            repo.parse_midi_track("#sr=24000 hop=256\n200\n")

    def test_file_round_trip(self, repo, tmp_path):
        """Test write_f0 then read_f0."""
        contour = F0Contour.from_values([0.0, 110.0, 220.5], FrameGrid(48000, 480))
        path = tmp_path / "f0.txt"
        repo.write_f0(path, contour)
        parsed = repo.read_f0(path)
        assert parsed.values.tolist() == [0.0, 110.0, 220.5]
        assert parsed.grid == FrameGrid(48000, 480)

    def test_value_just_below_nyquist_round_trips(self, repo):
        """Test the largest value below Nyquist is written in full and read back exactly."""
        grid = FrameGrid(24000, 240)
        top = float(np.nextafter(grid.nyquist, 0.0))
        contour = F0Contour.from_values([0.0, top, 11999.9999999], grid)
        text = repo.serialize_f0(contour)
        parsed = repo.parse_f0(text)
        assert parsed.values.tolist() == [0.0, top, 11999.9999999]
        assert "12000\n" not in text

    def test_clamped_vibrato_output_is_readable(self, repo):
        """Test a contour clamped below Nyquist by vibrato can be read back."""
        grid = FrameGrid(24000, 240)
        params = VibratoParams(depth_cents=1200, rate_hz=5, phase_rad=math.pi / 2, ramp_seconds=0)
        refined = PitchDynamicsService().apply_vibrato(flat_contour(11990.0, 50, grid), np.ones(50, dtype=bool), params)
        parsed = repo.parse_f0(repo.serialize_f0(refined))
        assert np.all(parsed.values < grid.nyquist)
        np.testing.assert_allclose(parsed.values, refined.values, rtol=1e-8)
