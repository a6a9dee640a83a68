"""
Tests for WavRepository.
"""

import struct

import numpy as np
import pytest

from src.models.errors import FormatError, StorageError, TruncationError, ValidationError
from src.models.signals import AudioBuffer, WavSpec
from src.repositories.wav_repository import WavRepository
from tests.test_config import rng


def _wav(fmt_tag: int, bits: int, payload: bytes, rate: int = 48000, channels: int = 1, extra_chunks: bytes = b"") -> bytes:
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * block, block, bits)
    body = b"WAVE" + extra_chunks + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


class TestWavRepository:
    """Test cases for WavRepository class."""

    @pytest.fixture
    def repo(self):
        return WavRepository()

    def test_pcm16_normalization(self, repo):
        """Test pcm16 samples {0, 16384, -32768} decode to {0, 0.5, -1}."""
        raw = _wav(1, 16, struct.pack("<3h", 0, 16384, -32768))
        buffer, spec = repo.decode(raw)
        assert buffer.samples.tolist() == [0.0, 0.5, -1.0]
        assert spec == WavSpec(48000, "pcm16")

    def test_pcm24_normalization(self, repo):
        """Test pcm24 samples are divided by 8388608."""
        payload = b"".join(v.to_bytes(3, "little", signed=True) for v in (0, 4194304, -8388608))
        buffer, spec = repo.decode(_wav(1, 24, payload, rate=24000))
        assert buffer.samples.tolist() == [0.0, 0.5, -1.0]
        assert spec.bit_format == "pcm24"

    def test_unknown_chunks_skipped(self, repo):
        """Test chunks before fmt are skipped."""
        extra = b"JUNK" + struct.pack("<I", 4) + b"\x00" * 4
        buffer, _ = repo.decode(_wav(1, 16, struct.pack("<h", 8192), extra_chunks=extra))
        assert buffer.samples.tolist() == [0.25]

    def test_float32_round_trip_is_bit_exact(self, repo):
        """Test float32 files reproduce random buffers exactly."""
        gen = rng(50)
        for _ in range(1000):
            samples = gen.uniform(-1, 1, int(gen.integers(0, 2000))).astype(np.float32).astype(np.float64)
            raw, clamped = repo.encode(AudioBuffer(samples, 48000), WavSpec(48000, "float32"))
            decoded, spec = repo.decode(raw)
            assert clamped == 0
            np.testing.assert_array_equal(decoded.samples, samples)
            assert spec.bit_format == "float32"

    @pytest.mark.parametrize("bit_format,lsb", [("pcm16", 1 / 32768), ("pcm24", 1 / 8388608)])
    def test_pcm_round_trip_within_one_lsb(self, repo, bit_format, lsb):
        """Test pcm formats round-trip within one least significant bit."""
        samples = rng(51).uniform(-1, 1, 4000)
        raw, _ = repo.encode(AudioBuffer(samples, 24000), WavSpec(24000, bit_format))
        decoded, _ = repo.decode(raw)
        assert np.max(np.abs(decoded.samples - samples)) <= lsb

    def test_clamping_is_counted(self, repo):
        """Test 2.0 under pcm16 clamps to 32767 and is counted once."""
        raw, clamped = repo.encode(AudioBuffer(np.array([2.0, 0.0]), 48000), WavSpec(48000, "pcm16"))
        assert clamped == 1
        assert struct.unpack_from("<h", raw, len(raw) - 4)[0] == 32767

    def test_empty_buffer(self, repo):
        """Test an empty buffer writes a valid zero-length data chunk."""
        raw, _ = repo.encode(AudioBuffer(np.zeros(0), 48000), WavSpec(48000, "pcm16"))
        assert raw.endswith(b"data" + struct.pack("<I", 0))
        buffer, _ = repo.decode(raw)
        assert len(buffer) == 0

    def test_encoding_is_deterministic(self, repo):
        """Test identical buffers encode to identical bytes."""
        buffer = AudioBuffer(rng(52).uniform(-1, 1, 100), 48000)
        assert repo.encode(buffer, WavSpec(48000))[0] == repo.encode(buffer, WavSpec(48000))[0]

    def test_rate_mismatch_on_encode(self, repo):
        """Test the WavSpec rate must match the buffer rate."""
        with pytest.raises(ValidationError):
            repo.encode(AudioBuffer(np.zeros(4), 24000), WavSpec(48000))

    def test_stereo_rejected(self, repo):
        """Test multichannel files are rejected loudly."""
        with pytest.raises(ValidationError, match="mono"):
            repo.decode(_wav(1, 16, b"\x00" * 8, channels=2))

    def test_not_riff(self, repo):
        """Test non-RIFF bytes are a format error."""
        with pytest.raises(FormatError):
            repo.decode(b"OggS" + b"\x00" * 40)

    def test_truncated_data_chunk(self, repo):
        """Test a data chunk shorter than declared is a truncation error."""
        raw = _wav(1, 16, struct.pack("<4h", 1, 2, 3, 4))
        with pytest.raises(TruncationError):
            repo.decode(raw[:-3])

    def test_missing_data_chunk(self, repo):
        """Test a file without data chunk is a format error."""
        fmt = struct.pack("<HHIIHH", 1, 1, 48000, 96000, 2, 16)
        body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        with pytest.raises(FormatError, match="data"):
            repo.decode(b"RIFF" + struct.pack("<I", len(body)) + body)

    def test_unsupported_encoding(self, repo):
        """Test 8-bit pcm is rejected."""
        with pytest.raises(FormatError):
            repo.decode(_wav(1, 8, b"\x00\x01"))

    def test_non_standard_rate_warns(self, repo, caplog):
        """Test rates other than 24/48 kHz decode with a warning."""
        buffer, spec = repo.decode(_wav(1, 16, struct.pack("<h", 0), rate=44100))
        assert spec.sample_rate == 44100
        assert "44100" in caplog.text

    def test_file_round_trip(self, repo, tmp_path):
        """Test write_wav then read_wav."""
        path = tmp_path / "out.wav"
        buffer = AudioBuffer(np.array([0.0, 0.25, -0.5]), 24000)
        assert repo.write_wav(path, buffer, WavSpec(24000, "float32")) == 0
        decoded, _ = repo.read_wav(path)
        assert decoded.samples.tolist() == [0.0, 0.25, -0.5]

    def test_missing_file(self, repo, tmp_path):
        """Test a missing file raises StorageError."""
        with pytest.raises(StorageError):
            repo.read_wav(tmp_path / "missing.wav")
