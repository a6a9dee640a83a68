"""
Repository for tab-separated annotation files: phoneme alignments, technique
segments and score notes.

Every file holds one record per line, `<key>\\t<start>\\t<end>`, times in decimal
seconds. Blank lines and lines starting with '#' are ignored. Serialization
emits six decimal places.
"""

import logging
import re
from typing import Iterator, List, Optional, Tuple, Union

from src.models.annotations import (
    LabelVocabulary,
    Note,
    NoteSequence,
    PhonemeAlignment,
    PhonemeSegment,
    TechniqueSegment,
    TechniqueSegmentFile,
)
from src.models.errors import FormatError, StylekitError, UnknownLabelError, ValidationError
from src.repositories.file_store import PathLike, decode_text, read_text

logger = logging.getLogger(__name__)

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")

Record = Tuple[int, str, float, float]


def _records(text: Union[str, bytes], source: str) -> Iterator[Record]:
    """Yield (line number, key, start, end) for every data line."""
    for line_no, raw_line in enumerate(decode_text(text, source).split("\n"), start=1):
        line = raw_line.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"expected 3 tab-separated fields, found {len(fields)}", line=line_no)
        key = fields[0].strip()
        if not key:
            raise FormatError("empty label", line=line_no)
        start = _parse_seconds(fields[1], line_no)
        end = _parse_seconds(fields[2], line_no)
        if start < 0:
            raise ValidationError(f"negative start time {start}", line=line_no)
        if end <= start:
            raise ValidationError("end ≤ start", line=line_no)
        yield line_no, key, start, end


def _parse_seconds(token: str, line_no: int) -> float:
    token = token.strip()
    if not _DECIMAL.match(token):
        raise FormatError(f"invalid decimal seconds '{token}'", line=line_no)
    value = float(token)
    if value != value or value in (float("inf"), float("-inf")):
        raise FormatError(f"seconds out of range '{token}'", line=line_no)
    return value


def _fmt(seconds: float) -> str:
    return f"{seconds:.6f}"


class AnnotationRepository:
    """
    Repository for annotation text files.

    Single Responsibility: Converts between annotation text and annotation types.
    """

    def parse_alignment(self, text: Union[str, bytes]) -> PhonemeAlignment:
        """
        Parse a phoneme alignment.

        Args:
            text: File content, `label<TAB>start<TAB>end` per line

        Returns:
            Validated alignment

        Raises:
            ParseError: On malformed lines
            ValidationError: On end <= start or overlapping segments
        """
        segments: List[PhonemeSegment] = []
        for line_no, label, start, end in _records(text, "alignment"):
            if segments and start < segments[-1].end:
                prev = segments[-1]
                raise ValidationError(
                    f"segment '{label}' [{start}, {end}] overlaps '{prev.label}' ending {prev.end}",
                    line=line_no,
                )
            segments.append(self._build(PhonemeSegment, line_no, label, start, end))
        return PhonemeAlignment(tuple(segments))

    def serialize_alignment(self, alignment: PhonemeAlignment) -> str:
        """Canonical text form of an alignment."""
        return "".join(f"{s.label}\t{_fmt(s.start)}\t{_fmt(s.end)}\n" for s in alignment.segments)

    def parse_technique_segments(
        self, text: Union[str, bytes], vocab: Optional[LabelVocabulary] = None
    ) -> TechniqueSegmentFile:
        """
        Parse technique segments against a vocabulary.

        Rows of different techniques may overlap; rows of one technique may not.

        Args:
            text: File content, `technique<TAB>start<TAB>end` per line
            vocab: Vocabulary, default technique set when omitted

        Returns:
            Segments grouped by technique

        Raises:
            UnknownLabelError: On a technique missing from the vocabulary
        """
        vocab = vocab or LabelVocabulary()
        rows: List[Tuple[int, TechniqueSegment]] = []
        for line_no, technique, start, end in _records(text, "technique segments"):
            if technique not in vocab:
                raise UnknownLabelError(
                    f"unknown technique '{technique}'; vocabulary is {', '.join(vocab.names)}",
                    line=line_no,
                )
            rows.append((line_no, self._build(TechniqueSegment, line_no, technique, start, end)))

        ordered = sorted(rows, key=lambda item: (item[1].technique, item[1].start))
        for (_, prev), (line_no, curr) in zip(ordered, ordered[1:]):
            if prev.technique == curr.technique and curr.start < prev.end:
                raise ValidationError(
                    f"'{curr.technique}' segment [{curr.start}, {curr.end}] overlaps "
                    f"[{prev.start}, {prev.end}]",
                    line=line_no,
                )
        return TechniqueSegmentFile(tuple(row for _, row in rows), vocab)

    def serialize_technique_segments(self, segments: TechniqueSegmentFile) -> str:
        """Canonical text form, grouped by technique in vocabulary order."""
        return "".join(f"{r.technique}\t{_fmt(r.start)}\t{_fmt(r.end)}\n" for r in segments.rows)

    def parse_notes(self, text: Union[str, bytes]) -> NoteSequence:
        """
        Parse score notes.

        Args:
            text: File content, `midi<TAB>start<TAB>end` per line

        Returns:
            Validated note sequence

        Raises:
            ParseError: On a non-integer pitch or malformed line
            ValidationError: On pitch outside 0-127 or overlapping notes
        """
        notes: List[Note] = []
        for line_no, pitch_token, start, end in _records(text, "notes"):
            if not _INTEGER.match(pitch_token):
                raise FormatError(f"MIDI pitch '{pitch_token}' is not an integer", line=line_no)
            pitch = int(pitch_token)
            if not 0 <= pitch <= 127:
                raise ValidationError(f"MIDI pitch {pitch} outside 0-127", line=line_no)
            if notes and start < notes[-1].end:
                raise ValidationError(
                    f"note [{start}, {end}] overlaps previous note ending {notes[-1].end}",
                    line=line_no,
                )
            notes.append(self._build(Note, line_no, pitch, start, end))
        return NoteSequence(tuple(notes))

    def serialize_notes(self, notes: NoteSequence) -> str:
        """Canonical text form of a note sequence."""
        return "".join(f"{n.midi_pitch}\t{_fmt(n.start)}\t{_fmt(n.end)}\n" for n in notes.notes)

    def load_alignment(self, path: PathLike) -> PhonemeAlignment:
        """Read and parse an alignment file."""
        return self.parse_alignment(read_text(path))

    def load_technique_segments(self, path: PathLike, vocab: Optional[LabelVocabulary] = None) -> TechniqueSegmentFile:
        """Read and parse a technique segment file."""
        return self.parse_technique_segments(read_text(path), vocab)

    def load_notes(self, path: PathLike) -> NoteSequence:
        """Read and parse a notes file."""
        return self.parse_notes(read_text(path))

    def load_vocabulary(self, path: PathLike) -> LabelVocabulary:
        """Read a comma- or newline-separated vocabulary file."""
        return LabelVocabulary.parse(read_text(path))

    @staticmethod
    def _build(cls, line_no: int, *args):
        try:
            return cls(*args)
        except StylekitError as e:
            raise type(e)(str(e), line=line_no) from None
