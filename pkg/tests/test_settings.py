"""
Tests for StylekitSettings.
"""

import pytest

from src.config import StylekitSettings
from src.models.errors import ConfigurationError
from src.models.frame_grid import FrameGrid


class TestStylekitSettings:
    """Test cases for StylekitSettings class."""

    def test_defaults(self):
        """Test an empty environment gives the built-in defaults."""
        settings = StylekitSettings.from_env({})
        assert settings == StylekitSettings()
        assert (settings.sample_rate, settings.hop, settings.lambda_) == (24000, 256, 0.1)
        assert (settings.log_level, settings.jobs) == ("WARNING", 1)

    def test_overrides(self):
        """Test every variable is read and converted."""
        settings = StylekitSettings.from_env({
            "STYLEKIT_SAMPLE_RATE": "48000",
            "STYLEKIT_HOP": "480",
            "STYLEKIT_LAMBDA": "0.25",
            "STYLEKIT_LOG_LEVEL": "debug",
            "STYLEKIT_JOBS": "4",
        })
        assert settings == StylekitSettings(48000, 480, 0.25, "DEBUG", 4)
        assert settings.grid == FrameGrid(48000, 480)

    def test_blank_values_use_defaults(self):
        """Test whitespace-only values fall back to defaults."""
        assert StylekitSettings.from_env({"STYLEKIT_HOP": "  "}).hop == 256

    @pytest.mark.parametrize("env,match", [
        ({"STYLEKIT_HOP": "fast"}, "STYLEKIT_HOP"),
        ({"STYLEKIT_SAMPLE_RATE": "24k"}, "STYLEKIT_SAMPLE_RATE"),
        ({"STYLEKIT_LAMBDA": "-0.5"}, "lambda"),
        ({"STYLEKIT_LOG_LEVEL": "chatty"}, "log level"),
        ({"STYLEKIT_JOBS": "0"}, "jobs"),
        ({"STYLEKIT_HOP": "0"}, "hop"),
    ])
    def test_invalid(self, env, match):
        """Test malformed and out-of-range values are configuration errors."""
        with pytest.raises(ConfigurationError, match=match) as excinfo:
            StylekitSettings.from_env(env)
        assert excinfo.value.exit_code == 3

    def test_reads_process_environment(self, monkeypatch):
        """Test os.environ is used when no mapping is given."""
        monkeypatch.setenv("STYLEKIT_JOBS", "3")
        assert StylekitSettings.from_env(dotenv=False).jobs == 3
