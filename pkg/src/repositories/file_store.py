"""
Byte-level file access used by every repository.

Writes go to a temporary file in the destination directory and are renamed
into place on success, so readers never observe a partial artifact.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Union

from src.models.errors import ParseError, StorageError

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def read_bytes(path: PathLike) -> bytes:
    """
    Read a whole file.

    Raises:
        StorageError: If the file cannot be read
    """
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e.strerror or e}") from e


def read_text(path: PathLike) -> str:
    """
    Read a UTF-8 text file.

    Raises:
        StorageError: If the file cannot be read
        ParseError: If the content is not valid UTF-8
    """
    return decode_text(read_bytes(path), str(path))


def decode_text(raw: Union[str, bytes], source: str = "input") -> str:
    """Decode UTF-8 bytes, passing str through."""
    if isinstance(raw, str):
        return raw
    try:
        return bytes(raw).decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{source} is not valid UTF-8 (byte offset {e.start})") from None


def write_bytes_atomic(path: PathLike, payload: bytes) -> None:
    """
    Write a file via a temporary sibling and an atomic rename.

    Raises:
        StorageError: If the file cannot be written
    """
    target = Path(path)
    tmp_name = None
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            dir=target.parent, prefix=f".{target.name}.", suffix=".tmp", delete=False
        ) as handle:
            tmp_name = handle.name
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
        tmp_name = None
        logger.debug("wrote %d bytes to %s", len(payload), target)
    except OSError as e:
        raise StorageError(f"cannot write {target}: {e.strerror or e}") from e
    finally:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)


def write_text_atomic(path: PathLike, text: str) -> None:
    """Write UTF-8 text atomically."""
    write_bytes_atomic(path, text.encode("utf-8"))
