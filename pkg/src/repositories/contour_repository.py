"""
Repository for frame-level text tracks: F0 contours and MIDI pitch tracks.

Layout: a header line `#sr=<int> hop=<int>` followed by one value per frame.
F0 values are written with 9 significant digits; 0 marks an unvoiced frame.
A value whose 9-digit form would reach Nyquist is written in full instead.
"""

import re
from typing import List, Tuple, Union

import numpy as np

from src.models.errors import FormatError, ValidationError
from src.models.frame_grid import FrameGrid
from src.models.signals import F0Contour
from src.repositories.file_store import PathLike, decode_text, read_text, write_text_atomic

_HEADER = re.compile(r"^#sr=(\d+) hop=(\d+)$")
_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^\d+$")


def _split_track(text: Union[str, bytes], source: str) -> Tuple[FrameGrid, List[Tuple[int, str]]]:
    lines = decode_text(text, source).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(f"{source} is empty; expected header '#sr=<int> hop=<int>'")
    header = _HEADER.match(lines[0].rstrip("\r").strip())
    if not header:
        raise FormatError("missing or malformed header '#sr=<int> hop=<int>'", line=1)
    if len(header.group(1)) > 9 or len(header.group(2)) > 9:
        raise FormatError("header sample rate or hop out of range", line=1)
    grid = FrameGrid(int(header.group(1)), int(header.group(2)))
    body = [(line_no, line.rstrip("\r").strip()) for line_no, line in enumerate(lines[1:], start=2)]
    return grid, body


def _format_hz(value: float, nyquist: float) -> str:
    text = format(value, ".9g")
    if float(text) >= nyquist:
        # repr is the shortest text that parses back to exactly this value
        return repr(value)
    return text


class ContourRepository:
    """
    Repository for F0 and MIDI track files.

    Single Responsibility: Converts between frame track text and contour types.
    """

    def parse_f0(self, text: Union[str, bytes]) -> F0Contour:
        """
        Parse an F0 file.

        Raises:
            FormatError: On a missing header or a non-numeric line
            ValidationError: On negative, non-finite or above-Nyquist values
        """
        grid, body = _split_track(text, "F0 file")
        values = np.empty(len(body), dtype=np.float64)
        for index, (line_no, token) in enumerate(body):
            if not _DECIMAL.match(token):
                raise FormatError(f"invalid F0 value '{token}'", line=line_no)
            value = float(token)
            if not np.isfinite(value):
                raise ValidationError(f"non-finite F0 value '{token}'", line=line_no)
            if value < 0:
                raise ValidationError(f"negative F0 value {value}", line=line_no)
            if value >= grid.nyquist:
                raise ValidationError(f"F0 value {value} Hz not below Nyquist", line=line_no)
            values[index] = value
        return F0Contour.from_values(values, grid)

    def serialize_f0(self, contour: F0Contour) -> str:
        """Text form of a contour, 9 significant digits per frame."""
        grid = contour.grid
        lines = [f"#sr={grid.sample_rate} hop={grid.hop}"]
        lines.extend(_format_hz(float(value), grid.nyquist) for value in contour.values)
        return "\n".join(lines) + "\n"

    def parse_midi_track(self, text: Union[str, bytes]) -> Tuple[np.ndarray, FrameGrid]:
        """Parse a MIDI track file into (pitches, grid)."""
        grid, body = _split_track(text, "MIDI track")
        track = np.empty(len(body), dtype=np.int64)
        for index, (line_no, token) in enumerate(body):
            if not _INTEGER.match(token) or int(token) > 127:
                raise FormatError(f"invalid MIDI pitch '{token}'", line=line_no)
            track[index] = int(token)
        return track, grid

    def serialize_midi_track(self, track: np.ndarray, grid: FrameGrid) -> str:
        """Text form of a frame-level MIDI track (0 = no note)."""
        lines = [f"#sr={grid.sample_rate} hop={grid.hop}"]
        lines.extend(str(int(pitch)) for pitch in track)
        return "\n".join(lines) + "\n"

    def read_f0(self, path: PathLike) -> F0Contour:
        """Read an F0 file."""
        return self.parse_f0(read_text(path))

    def write_f0(self, path: PathLike, contour: F0Contour) -> None:
        """Write an F0 file."""
        write_text_atomic(path, self.serialize_f0(contour))

    def write_midi_track(self, path: PathLike, track: np.ndarray, grid: FrameGrid) -> None:
        """Write a MIDI track file."""
        write_text_atomic(path, self.serialize_midi_track(track, grid))
