"""
Repository for technique matrix text files.

Layout:

    #techniques=breathy,vibrato n_frames=5
    00110
    11100

One line per technique in header order, one character per frame.
"""

import re
from typing import Union

import numpy as np

from src.models.annotations import LabelVocabulary
from src.models.errors import FormatError, LengthMismatchError, StylekitError
from src.models.technique_matrix import TechniqueMatrix
from src.repositories.file_store import PathLike, decode_text, read_text, write_text_atomic

_HEADER = re.compile(r"^#techniques=(\S+) n_frames=(\d+)$")
_BITS = re.compile(r"^[01]*$")


class MatrixRepository:
    """
    Repository for technique matrix files.

    Single Responsibility: Converts between matrix text and TechniqueMatrix.
    """

    def parse_matrix(self, text: Union[str, bytes]) -> TechniqueMatrix:
        """
        Parse a technique matrix.

        The header's technique order is authoritative for row order.

        Raises:
            FormatError: On a malformed header or characters outside {0, 1}
            LengthMismatchError: On a wrong row count or row length
        """
        lines = decode_text(text, "technique matrix").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        lines = [line.rstrip("\r") for line in lines]
        if not lines:
            raise FormatError("technique matrix is empty; expected '#techniques=<list> n_frames=<N>'")

        header = _HEADER.match(lines[0].strip())
        if not header:
            raise FormatError("missing or malformed header '#techniques=<list> n_frames=<N>'", line=1)
        try:
            vocab = LabelVocabulary.from_names(header.group(1).split(","))
        except StylekitError as e:
            raise FormatError(f"invalid technique list: {e}", line=1) from None
        if len(header.group(2)) > 9:
            raise FormatError("n_frames out of range", line=1)
        n_frames = int(header.group(2))

        rows = lines[1:]
        if len(rows) != len(vocab):
            raise LengthMismatchError(f"header lists {len(vocab)} techniques but {len(rows)} rows follow")

        for index, row in enumerate(rows):
            line_no = index + 2
            if not _BITS.match(row):
                raise FormatError("row holds characters other than 0 and 1", line=line_no)
            if len(row) != n_frames:
                raise LengthMismatchError(f"row has {len(row)} frames, header declares {n_frames}", line=line_no)

        bits = np.zeros((len(vocab), n_frames), dtype=np.uint8)
        for index, row in enumerate(rows):
            bits[index] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) - ord("0")
        return TechniqueMatrix(vocab, bits)

    def serialize_matrix(self, matrix: TechniqueMatrix) -> str:
        """Text form of a technique matrix."""
        lines = [f"#techniques={','.join(matrix.vocab.names)} n_frames={matrix.n_frames}"]
        for row in matrix.bits:
            lines.append((row + ord("0")).astype(np.uint8).tobytes().decode("ascii"))
        return "\n".join(lines) + "\n"

    def read_matrix(self, path: PathLike) -> TechniqueMatrix:
        """Read a technique matrix file."""
        return self.parse_matrix(read_text(path))

    def write_matrix(self, path: PathLike, matrix: TechniqueMatrix) -> None:
        """Write a technique matrix file."""
        write_text_atomic(path, self.serialize_matrix(matrix))
