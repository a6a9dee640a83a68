"""
Repository for binary feature matrices.

Layout, little-endian:

    offset  size  field
    0       4     magic b"SSCF"
    4       4     version (u32) = 1
    8       4     n_frames (u32)
    12      4     dim (u32)
    16      ...   n_frames * dim float32, row-major
"""

import struct
from typing import Union

import numpy as np

from src.models.errors import (
    BadMagicError,
    FormatError,
    TruncationError,
    UnsupportedVersionError,
    ValidationError,
)
from src.models.signals import FeatureMatrix
from src.repositories.file_store import PathLike, read_bytes, write_bytes_atomic

MAGIC = b"SSCF"
VERSION = 1
HEADER = struct.Struct("<4sIII")
_ITEM_SIZE = 4


class FeatureRepository:
    """
    Repository for `.sscf` feature files.

    Single Responsibility: Converts between feature bytes and FeatureMatrix.
    """

    def decode(self, raw: Union[bytes, bytearray, memoryview]) -> FeatureMatrix:
        """
        Decode a feature file.

        Args:
            raw: File bytes

        Returns:
            Feature matrix (float32 values widened to float64)

        Raises:
            TruncationError: If the file is shorter than header or payload
            BadMagicError: If the magic bytes differ
            UnsupportedVersionError: If the version is not 1
            FormatError: On zero dimension, trailing bytes or non-finite values
        """
        raw = bytes(raw)
        if len(raw) < 4:
            raise TruncationError(f"feature file has {len(raw)} bytes, header needs {HEADER.size}")
        if raw[:4] != MAGIC:
            raise BadMagicError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}")
        if len(raw) < HEADER.size:
            raise TruncationError(f"feature file has {len(raw)} bytes, header needs {HEADER.size}")

        _, version, n_frames, dim = HEADER.unpack_from(raw)
        if version != VERSION:
            raise UnsupportedVersionError(f"feature file version {version}, expected {VERSION}")
        if dim < 1:
            raise FormatError("feature dimension must be >= 1")

        expected = n_frames * dim * _ITEM_SIZE
        payload = len(raw) - HEADER.size
        if payload < expected:
            raise TruncationError(
                f"feature payload has {payload} bytes, header declares {n_frames}x{dim} ({expected} bytes)"
            )
        if payload > expected:
            raise FormatError(f"{payload - expected} trailing bytes after feature payload")

        data = np.frombuffer(raw, dtype="<f4", count=n_frames * dim, offset=HEADER.size)
        if not np.all(np.isfinite(data)):
            raise FormatError("feature payload holds non-finite values")
        return FeatureMatrix(data.astype(np.float64).reshape(n_frames, dim))

    def encode(self, features: FeatureMatrix) -> bytes:
        """Encode a feature matrix; values are rounded to float32."""
        with np.errstate(over="ignore"):
            payload = np.ascontiguousarray(features.data, dtype="<f4")
        if not np.all(np.isfinite(payload)):
            raise ValidationError("feature values exceed the float32 range")
        header = HEADER.pack(MAGIC, VERSION, features.n_frames, features.dim)
        return header + payload.tobytes()

    def read_features(self, path: PathLike) -> FeatureMatrix:
        """Read a feature file."""
        return self.decode(read_bytes(path))

    def write_features(self, path: PathLike, features: FeatureMatrix) -> None:
        """Write a feature file."""
        write_bytes_atomic(path, self.encode(features))
