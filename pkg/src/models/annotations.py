"""
Time-stamped annotation types: phoneme alignments, notes and technique segments.

All types are immutable and validate their invariants on construction.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import librosa
import numpy as np

from src.models.errors import UnknownLabelError, ValidationError
from src.models.frame_grid import FrameGrid, seconds_to_frame_span

logger = logging.getLogger(__name__)

DEFAULT_TECHNIQUES = ("breathy", "falsetto", "mixed_voice", "resonance", "vibrato", "glissando")

_LABEL_FORBIDDEN = re.compile(r"[\s,=]")
_LINE_BREAKING = re.compile(r"[\t\r\n]")


def _check_label(label: str, what: str) -> None:
    """Labels must survive one tab-separated text line unchanged."""
    if not isinstance(label, str) or not label:
        raise ValidationError(f"{what} label cannot be empty")
    if _LINE_BREAKING.search(label):
        raise ValidationError(f"{what} label {label!r} contains a tab or line break")
    if label != label.strip():
        raise ValidationError(f"{what} label {label!r} has surrounding whitespace")
    if label.startswith("#"):
        raise ValidationError(f"{what} label {label!r} starts with the comment marker '#'")


def _check_interval(start: float, end: float, what: str) -> None:
    if not (math.isfinite(start) and math.isfinite(end)):
        raise ValidationError(f"{what} times must be finite, got ({start}, {end})")
    if start < 0:
        raise ValidationError(f"{what} start must be >= 0, got {start}")
    if end <= start:
        raise ValidationError(f"{what} end <= start ({end} <= {start})")


@dataclass(frozen=True)
class PhonemeSegment:
    """One aligned phoneme."""
    label: str
    start: float
    end: float

    def __post_init__(self):
        """Validate segment after initialization."""
        _check_label(self.label, "Phoneme")
        _check_interval(self.start, self.end, f"phoneme '{self.label}'")


@dataclass(frozen=True)
class PhonemeAlignment:
    """
    Ordered, non-overlapping phoneme segments.

    Single Responsibility: Holds the pooling neighbourhoods of one clip.
    """
    segments: Tuple[PhonemeSegment, ...] = ()

    def __post_init__(self):
        """Validate ordering after initialization."""
        object.__setattr__(self, "segments", tuple(self.segments))
        for index in range(1, len(self.segments)):
            prev, curr = self.segments[index - 1], self.segments[index]
            if curr.start < prev.end:
                raise ValidationError(
                    f"phoneme segment {index + 1} ('{curr.label}' at {curr.start}) overlaps "
                    f"segment {index} ('{prev.label}' ending {prev.end})"
                )

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def end(self) -> float:
        """End time of the last segment, 0.0 when empty."""
        return self.segments[-1].end if self.segments else 0.0


def segment_map(alignment: PhonemeAlignment, n_frames: int, grid: FrameGrid) -> np.ndarray:
    """
    Assign every frame a pooling segment id.

    Frames inside an aligned segment share its id; each maximal uncovered run
    (leading silence, gaps, frames past the last segment) gets a fresh id.
    Ids start at 0 and increase by one at each boundary.

    Args:
        alignment: Phoneme alignment
        n_frames: Number of frames to label
        grid: Frame grid

    Returns:
        Integer array of length n_frames
    """
    if n_frames < 0:
        raise ValidationError(f"n_frames must be >= 0, got {n_frames}")

    ids = np.empty(n_frames, dtype=np.int64)
    next_id = 0
    cursor = 0
    for segment in alignment.segments:
        if cursor >= n_frames:
            break
        a, b = seconds_to_frame_span(segment.start, segment.end, grid)
        a = max(a, cursor)
        b = min(b, n_frames)
        if b <= a:
            logger.debug("phoneme '%s' at %.6f s absorbed by its predecessor", segment.label, segment.start)
            continue
        if a > cursor:
            ids[cursor:a] = next_id
            next_id += 1
        ids[a:b] = next_id
        next_id += 1
        cursor = b

    if cursor < n_frames:
        ids[cursor:] = next_id
    return ids


@dataclass(frozen=True)
class Note:
    """A score note."""
    midi_pitch: int
    start: float
    end: float

    def __post_init__(self):
        """Validate note after initialization."""
        if isinstance(self.midi_pitch, bool) or not isinstance(self.midi_pitch, (int, np.integer)):
            raise ValidationError(f"MIDI pitch must be an integer, got {self.midi_pitch!r}")
        if not 0 <= self.midi_pitch <= 127:
            raise ValidationError(f"MIDI pitch {self.midi_pitch} outside 0-127")
        _check_interval(self.start, self.end, f"note {self.midi_pitch}")

    @property
    def frequency(self) -> float:
        """Target frequency in Hz."""
        return midi_to_hz(self.midi_pitch)


def midi_to_hz(midi_pitch: float) -> float:
    """Convert a MIDI note number to Hz (A4 = 69 = 440 Hz)."""
    return float(librosa.midi_to_hz(midi_pitch))


@dataclass(frozen=True)
class NoteSequence:
    """Ordered, non-overlapping notes of one clip."""
    notes: Tuple[Note, ...] = ()

    def __post_init__(self):
        """Validate ordering after initialization."""
        object.__setattr__(self, "notes", tuple(self.notes))
        for index in range(1, len(self.notes)):
            prev, curr = self.notes[index - 1], self.notes[index]
            if curr.start < prev.end:
                raise ValidationError(
                    f"note {index + 1} (start {curr.start}) overlaps note {index} (end {prev.end})"
                )

    def __len__(self) -> int:
        return len(self.notes)

    def frequencies(self) -> np.ndarray:
        """Target frequency of every note in Hz."""
        pitches = np.array([note.midi_pitch for note in self.notes], dtype=np.float64)
        return np.asarray(librosa.midi_to_hz(pitches), dtype=np.float64)

    def midi_track(self, n_frames: int, grid: FrameGrid) -> np.ndarray:
        """
        Frame-level MIDI pitch, 0 where no note sounds.

        Args:
            n_frames: Number of frames
            grid: Frame grid

        Returns:
            Integer array of length n_frames
        """
        track = np.zeros(n_frames, dtype=np.int64)
        for note in self.notes:
            a, b = seconds_to_frame_span(note.start, note.end, grid)
            track[min(a, n_frames):min(b, n_frames)] = note.midi_pitch
        return track


@dataclass(frozen=True)
class LabelVocabulary:
    """
    Ordered technique names; the index of a name is its row in the technique matrix.
    """
    names: Tuple[str, ...] = DEFAULT_TECHNIQUES

    def __post_init__(self):
        """Validate names after initialization."""
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise ValidationError("Technique vocabulary cannot be empty")
        for name in self.names:
            if not isinstance(name, str) or not name:
                raise ValidationError("Technique names cannot be empty")
            if _LABEL_FORBIDDEN.search(name):
                raise ValidationError(f"Technique name '{name}' contains whitespace, ',' or '='")
            if name.startswith("#"):
                raise ValidationError(f"Technique name '{name}' starts with the comment marker '#'")
        if len(set(self.names)) != len(self.names):
            raise ValidationError(f"Technique names must be unique: {', '.join(self.names)}")

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "LabelVocabulary":
        """Build a vocabulary from names, stripping surrounding whitespace."""
        return cls(tuple(name.strip() for name in names))

    @classmethod
    def parse(cls, text: str) -> "LabelVocabulary":
        """Parse a comma- or newline-separated list of names."""
        names = [part.strip() for part in re.split(r"[,\n]", text)]
        return cls.from_names(name for name in names if name and not name.startswith("#"))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        """
        Row index of a technique.

        Raises:
            UnknownLabelError: If the name is not in the vocabulary
        """
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownLabelError(
                f"unknown technique '{name}'; vocabulary is {', '.join(self.names)}"
            ) from None


@dataclass(frozen=True)
class TechniqueSegment:
    """One annotated technique span."""
    technique: str
    start: float
    end: float

    def __post_init__(self):
        """Validate segment after initialization."""
        _check_label(self.technique, "Technique")
        _check_interval(self.start, self.end, f"technique '{self.technique}'")


@dataclass(frozen=True)
class TechniqueSegmentFile:
    """
    Technique segments of one clip, grouped by technique in vocabulary order.

    Segments of different techniques may overlap; segments of one technique may not.
    """
    rows: Tuple[TechniqueSegment, ...]
    vocab: LabelVocabulary = field(default_factory=LabelVocabulary)

    def __post_init__(self):
        """Validate labels and per-technique overlap after initialization."""
        for row in self.rows:
            self.vocab.index(row.technique)
        ordered = sorted(self.rows, key=lambda row: (self.vocab.index(row.technique), row.start, row.end))
        for prev, curr in zip(ordered, ordered[1:]):
            if prev.technique == curr.technique and curr.start < prev.end:
                raise ValidationError(
                    f"'{curr.technique}' segment [{curr.start}, {curr.end}] overlaps "
                    f"[{prev.start}, {prev.end}]"
                )
        object.__setattr__(self, "rows", tuple(ordered))

    def by_technique(self) -> Dict[str, List[TechniqueSegment]]:
        """Rows keyed by technique name, every vocabulary entry present."""
        grouped: Dict[str, List[TechniqueSegment]] = {name: [] for name in self.vocab.names}
        for row in self.rows:
            grouped[row.technique].append(row)
        return grouped
