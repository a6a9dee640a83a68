"""
Error hierarchy shared by every stylekit layer.

Each error carries the exit code the command-line front end reports for it:
0 ok, 2 parse error, 3 validation error, 4 I/O error.
"""

from typing import Optional


class StylekitError(Exception):
    """Base class for all structured stylekit errors."""

    exit_code = 1
    kind = "internal"

    def __init__(self, message: str, line: Optional[int] = None):
        """
        Initialize the error.

        Args:
            message: Human readable reason
            line: Optional 1-based line number the error refers to
        """
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line

    @property
    def reason(self) -> str:
        """Single-line reason, safe to print in machine-parsable output."""
        return " ".join(str(self).split())


class ParseError(StylekitError, ValueError):
    """Malformed text or bytes."""

    exit_code = 2
    kind = "parse"


class UsageError(ParseError):
    """Unknown, missing or malformed command-line arguments."""

    kind = "usage"


class FormatError(ParseError):
    """Input does not follow the expected layout."""


class BadMagicError(ParseError):
    """Binary file does not start with the expected magic bytes."""

    kind = "bad-magic"


class UnsupportedVersionError(ParseError):
    """Binary file declares a format version we cannot read."""

    kind = "version"


class TruncationError(ParseError):
    """Input is shorter than its header declares."""

    kind = "truncated"


class ValidationError(StylekitError, ValueError):
    """Well-formed input violating a domain invariant."""

    exit_code = 3
    kind = "validation"


class UnknownLabelError(ValidationError):
    """Technique name that is not part of the vocabulary."""

    kind = "unknown-label"


class LengthMismatchError(ValidationError):
    """Frame-level structures disagree on their length."""

    kind = "length-mismatch"


class RateMismatchError(ValidationError):
    """Audio arrived at the wrong sample rate."""

    kind = "rate-mismatch"


class DurationMismatchError(ValidationError):
    """Two audio branches differ in duration beyond tolerance."""

    kind = "duration-mismatch"


class ConfigurationError(ValidationError):
    """Invalid parameter, flag or environment setting."""

    kind = "config"


class ManifestError(ValidationError):
    """Pipeline manifest is incomplete or inconsistent."""

    kind = "manifest"


class StorageError(StylekitError, OSError):
    """Reading or writing a file failed."""

    exit_code = 4
    kind = "io"
