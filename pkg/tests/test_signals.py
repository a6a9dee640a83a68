"""
Tests for signal models, the technique matrix and the error hierarchy.
"""

import numpy as np
import pytest

from src.models.annotations import LabelVocabulary
from src.models.errors import (
    BadMagicError,
    ConfigurationError,
    FormatError,
    LengthMismatchError,
    ParseError,
    StorageError,
    StylekitError,
    TruncationError,
    ValidationError,
)
from src.models.frame_grid import FrameGrid
from src.models.signals import AudioBuffer, F0Contour, FeatureMatrix, WavSpec
from src.models.technique_matrix import TechniqueMatrix


class TestF0Contour:
    """Test cases for F0Contour class."""

    def test_from_values_derives_voicing(self):
        """Test zeros become unvoiced frames."""
        contour = F0Contour.from_values([0.0, 220.0, 0.0, 440.0])
        assert contour.voiced.tolist() == [False, True, False, True]
        assert contour.n_frames == 4

    def test_voicing_disagreement_raises_error(self):
        """Test values > 0 must coincide with voiced flags."""
        with pytest.raises(ValidationError, match="frame 1"):
            F0Contour(np.array([0.0, 220.0]), np.array([False, False]))

    @pytest.mark.parametrize("value", [-1.0, float("nan"), float("inf"), 12000.0])
    def test_invalid_values_raise_error(self, value):
        """Test negative, non-finite and above-Nyquist values are rejected."""
        with pytest.raises(ValidationError):
            F0Contour.from_values([value], FrameGrid(24000, 256))

    def test_length_mismatch_raises_error(self):
        """Test values and flags must have the same length."""
        with pytest.raises(ValidationError):
            F0Contour(np.array([100.0, 200.0]), np.array([True]))

    def test_arrays_are_read_only(self):
        """Test contour arrays cannot be mutated in place."""
        contour = F0Contour.from_values([100.0])
        with pytest.raises(ValueError):
            contour.values[0] = 200.0


class TestFeatureMatrix:
    """Test cases for FeatureMatrix class."""

    def test_shape(self):
        """Test frame count and dimension."""
        matrix = FeatureMatrix(np.zeros((3, 2)))
        assert (matrix.n_frames, matrix.dim) == (3, 2)

    def test_empty(self):
        """Test a zero-frame matrix keeps its dimension."""
        assert FeatureMatrix.empty(4).dim == 4

    @pytest.mark.parametrize("data", [np.zeros(3), np.zeros((2, 0)), np.array([[np.nan]])])
    def test_invalid_data_raises_error(self, data):
        """Test wrong rank, zero dimension or non-finite data are rejected."""
        with pytest.raises(ValidationError):
            FeatureMatrix(data)


class TestAudioBuffer:
    """Test cases for AudioBuffer and WavSpec."""

    def test_duration(self):
        """Test duration is length over rate."""
        assert AudioBuffer(np.zeros(12000), 24000).duration == 0.5

    def test_non_finite_samples_raise_error(self):
        """Test non-finite samples are rejected."""
        with pytest.raises(ValidationError):
            AudioBuffer(np.array([0.0, np.inf]), 48000)

    def test_stereo_rejected(self):
        """Test 2-D sample arrays are rejected."""
        with pytest.raises(ValidationError, match="mono"):
            AudioBuffer(np.zeros((2, 10)), 48000)

    def test_wav_spec(self):
        """Test WavSpec validation and standard rates."""
        assert WavSpec(48000).is_standard_rate
        assert not WavSpec(44100, "pcm16").is_standard_rate
        with pytest.raises(ValidationError):
            WavSpec(48000, "pcm8")
        with pytest.raises(ValidationError):
            WavSpec(48000, "pcm16", channels=2)


class TestTechniqueMatrix:
    """Test cases for TechniqueMatrix class."""

    def test_mask_and_counts(self):
        """Test row masks and active-frame counts."""
        vocab = LabelVocabulary(("vibrato", "breathy"))
        matrix = TechniqueMatrix(vocab, np.array([[1, 0, 1], [0, 0, 1]]))
        assert matrix.mask("vibrato").tolist() == [True, False, True]
        assert matrix.counts() == {"vibrato": 2, "breathy": 1}
        assert matrix.has("breathy")
        assert not matrix.has("glissando")

    def test_row_count_must_match_vocabulary(self):
        """Test the row count must equal the vocabulary size."""
        with pytest.raises(LengthMismatchError):
            TechniqueMatrix(LabelVocabulary(("vibrato",)), np.zeros((2, 3)))

    def test_non_binary_entries_rejected(self):
        """Test entries other than 0 and 1 are rejected."""
        with pytest.raises(ValidationError):
            TechniqueMatrix(LabelVocabulary(("vibrato",)), np.array([[0, 2]]))

    def test_union(self):
        """Test elementwise OR of two matrices."""
        vocab = LabelVocabulary(("vibrato", "breathy"))
        left = TechniqueMatrix(vocab, np.array([[1, 0, 0], [0, 0, 0]]))
        right = TechniqueMatrix(vocab, np.array([[0, 0, 1], [0, 1, 0]]))
        assert left.union(right).bits.tolist() == [[1, 0, 1], [0, 1, 0]]
        with pytest.raises(LengthMismatchError):
            left.union(TechniqueMatrix.zeros(vocab, 2))


class TestErrors:
    """Test cases for the error hierarchy."""

    def test_exit_codes(self):
        """Test each family maps to its exit code."""
        assert FormatError("x").exit_code == 2
        assert ValidationError("x").exit_code == 3
        assert ConfigurationError("x").exit_code == 3
        assert StorageError("x").exit_code == 4
        assert StylekitError("x").exit_code == 1

    def test_kinds_are_distinct(self):
        """Test binary format errors carry distinct kinds."""
        kinds = {BadMagicError("x").kind, TruncationError("x").kind, FormatError("x").kind}
        assert len(kinds) == 3

    def test_line_number_in_message(self):
        """Test the line number is appended to the reason."""
        error = ParseError("bad field", line=7)
        assert error.reason == "bad field at line 7"
        assert error.line == 7

    def test_errors_are_value_errors(self):
        """Test parse and validation errors remain ValueErrors."""
        assert isinstance(FormatError("x"), ValueError)
        assert isinstance(ValidationError("x"), ValueError)
        assert isinstance(StorageError("x"), OSError)
