"""
Test configuration utilities: environment switches and synthetic signal helpers.
"""

import functools
import os
from pathlib import Path

import numpy as np
import pytest
from dotenv import load_dotenv

from src.models.frame_grid import FrameGrid
from src.models.signals import AudioBuffer, F0Contour, WavSpec
from src.repositories.wav_repository import WavRepository

SEED = 20240611
FAST_FUZZ_CASES = 2000
SLOW_FUZZ_CASES = 100000


def load_test_env():
    """Load environment variables from .env file for testing."""
    env_path = Path(__file__).parent.parent / '.env'
    if env_path.exists():
        load_dotenv(env_path)
    return {
        'run_slow_tests': os.getenv('RUN_SLOW_TESTS', 'false').lower() == 'true',
    }


def requires_slow_tests(test_func):
    """Decorator to skip long-running sweeps unless explicitly enabled."""
    @functools.wraps(test_func)
    def wrapper(*args, **kwargs):
        config = load_test_env()
        if not config['run_slow_tests']:
            pytest.skip("Slow tests disabled. Set RUN_SLOW_TESTS=true in .env to run.")
        return test_func(*args, **kwargs)
    return wrapper


def fuzz_cases() -> int:
    """Number of fuzz inputs per parser for this run."""
    return SLOW_FUZZ_CASES if load_test_env()['run_slow_tests'] else FAST_FUZZ_CASES


def rng(offset: int = 0) -> np.random.Generator:
    """Seeded generator so randomized tests are reproducible."""
    return np.random.default_rng(SEED + offset)


def sine(freq_hz: float, duration: float, sample_rate: int, amplitude: float = 1.0) -> AudioBuffer:
    """Sine buffer starting at phase 0."""
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq_hz * t), sample_rate)


def white_noise(duration: float, sample_rate: int, seed: int = 0, amplitude: float = 0.1) -> AudioBuffer:
    """Gaussian noise buffer."""
    n = int(round(duration * sample_rate))
    return AudioBuffer(amplitude * rng(seed).standard_normal(n), sample_rate)


def flat_contour(hz: float, n_frames: int, grid: FrameGrid = None) -> F0Contour:
    """Constant, fully voiced contour."""
    return F0Contour.from_values(np.full(n_frames, hz), grid or FrameGrid())


def create_test_audio_file(filepath, buffer: AudioBuffer, bit_format: str = "float32"):
    """Write a mono WAV file for a test and return its path."""
    WavRepository().write_wav(filepath, buffer, WavSpec(buffer.sample_rate, bit_format))
    return filepath
