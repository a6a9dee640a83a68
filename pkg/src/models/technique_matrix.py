"""
Frame-level multi-hot technique matrix.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.models.annotations import LabelVocabulary
from src.models.errors import LengthMismatchError, ValidationError


@dataclass(frozen=True, eq=False)
class TechniqueMatrix:
    """
    K x N binary matrix; row k marks the frames where technique k is active.

    Single Responsibility: Holds the style control signal of one clip.
    Columns may hold several ones (techniques co-occur).
    """
    vocab: LabelVocabulary
    bits: np.ndarray

    def __post_init__(self):
        """Validate shape and values after initialization."""
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValidationError(f"technique matrix must be 2-D, got {bits.ndim}-D")
        if bits.shape[0] != len(self.vocab):
            raise LengthMismatchError(
                f"technique matrix has {bits.shape[0]} rows for {len(self.vocab)} techniques"
            )
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ValidationError("technique matrix entries must be 0 or 1")
        frozen = bits.astype(np.uint8)
        frozen.flags.writeable = False
        object.__setattr__(self, "bits", frozen)

    @classmethod
    def zeros(cls, vocab: LabelVocabulary, n_frames: int) -> "TechniqueMatrix":
        """All-zero matrix."""
        return cls(vocab, np.zeros((len(vocab), n_frames), dtype=np.uint8))

    @property
    def n_frames(self) -> int:
        """Number of frames N."""
        return int(self.bits.shape[1])

    def mask(self, technique: str) -> np.ndarray:
        """
        Frame mask of one technique.

        Args:
            technique: Technique name

        Returns:
            Boolean array of length N

        Raises:
            UnknownLabelError: If the technique is not in the vocabulary
        """
        return self.bits[self.vocab.index(technique)].astype(bool)

    def has(self, technique: str) -> bool:
        """True when the technique is in the vocabulary and active on some frame."""
        return technique in self.vocab and bool(self.mask(technique).any())

    def counts(self) -> Dict[str, int]:
        """Active frame count per technique, in vocabulary order."""
        return {name: int(self.bits[k].sum()) for k, name in enumerate(self.vocab.names)}

    def union(self, other: "TechniqueMatrix") -> "TechniqueMatrix":
        """Elementwise OR with a matrix over the same vocabulary and length."""
        if other.vocab.names != self.vocab.names:
            raise ValidationError("cannot combine technique matrices with different vocabularies")
        if other.n_frames != self.n_frames:
            raise LengthMismatchError(
                f"cannot combine technique matrices of {self.n_frames} and {other.n_frames} frames"
            )
        return TechniqueMatrix(self.vocab, self.bits | other.bits)

    def equals(self, other: "TechniqueMatrix") -> bool:
        """Same vocabulary order and identical bits."""
        return self.vocab.names == other.vocab.names and np.array_equal(self.bits, other.bits)
