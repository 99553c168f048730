"""Exception hierarchy for evidential_ogm.

Every error raised on purpose by the package derives from
:class:`EvidentialOgmError`. Each class carries the process exit code the CLI
uses when the error reaches the top level.
"""

from __future__ import annotations

from pathlib import Path
from typing import ClassVar

__all__ = [
    "BadMagicError",
    "ConflictError",
    "DomainError",
    "EvidentialOgmError",
    "FormatError",
    "InvariantViolationError",
    "TruncatedFileError",
    "UnsupportedVersionError",
]


class EvidentialOgmError(Exception):
    """Base class for all package errors."""

    exit_code: ClassVar[int] = 1


class DomainError(EvidentialOgmError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code: ClassVar[int] = 5


class ConflictError(EvidentialOgmError, ArithmeticError):
    """Dempster combination of two totally conflicting mass functions.

    Parameters
    ----------
    conflict : float
        The conflict mass ``κ`` that triggered the error.
    """

    exit_code: ClassVar[int] = 6

    def __init__(self, conflict: float) -> None:
        super().__init__(f"total conflict in Dempster combination (κ={conflict!r})")
        self.conflict = conflict


class FormatError(EvidentialOgmError):
    """A binary file does not follow its declared layout.

    Parameters
    ----------
    path : Path | None
        File being parsed, when known.
    reason : str
        Human readable description of the violation.
    """

    exit_code: ClassVar[int] = 4

    def __init__(self, reason: str, path: Path | None = None) -> None:
        message = f"{path}: {reason}" if path is not None else reason
        super().__init__(message)
        self.path = path
        self.reason = reason


class BadMagicError(FormatError):
    """The leading magic bytes do not match the expected format."""


class UnsupportedVersionError(FormatError):
    """The format version is newer than this reader."""


class TruncatedFileError(FormatError):
    """The file ends before the declared payload does."""


class InvariantViolationError(FormatError):
    """The payload parses but violates a format invariant."""
