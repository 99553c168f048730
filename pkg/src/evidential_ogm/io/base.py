"""File handler registry and shared binary helpers."""

from __future__ import annotations

import os
import struct
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, ClassVar

from evidential_ogm.errors import (
    BadMagicError,
    FormatError,
    TruncatedFileError,
    UnsupportedVersionError,
)

__all__ = [
    "FileIOBase",
    "IORegistry",
    "atomic_write_bytes",
    "unpack_header",
]


def atomic_write_bytes(path: str | Path, data: bytes) -> Path:
    """
    Write ``data`` to a temporary sibling and rename it over ``path``.

    Readers never observe a partially written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        with open(tmp, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)
    return path


def unpack_header(
    data: bytes,
    fmt: struct.Struct,
    magic: bytes,
    version: int,
    path: Path | None = None,
) -> tuple[Any, ...]:
    """
    Unpack a header starting with ``magic`` and a u16 version.

    Returns the header fields after magic and version.

    Raises
    ------
    TruncatedFileError
        If ``data`` is shorter than the header.
    BadMagicError
        If the magic bytes differ.
    UnsupportedVersionError
        If the version is not ``version``.
    """
    if len(data) < len(magic):
        raise TruncatedFileError(f"{len(data)} bytes is shorter than the magic", path)
    if data[: len(magic)] != magic:
        raise BadMagicError(
            f"expected magic {magic!r}, found {data[: len(magic)]!r}", path
        )
    if len(data) < fmt.size:
        raise TruncatedFileError(
            f"header needs {fmt.size} bytes, file has {len(data)}", path
        )
    _, found_version, *fields = fmt.unpack_from(data)
    if found_version != version:
        raise UnsupportedVersionError(
            f"format version {found_version} is not supported (expected {version})",
            path,
        )
    return tuple(fields)


class FileIOBase(ABC):
    """
    Abstract base class for file format handlers.

    Each subclass handles one binary format and provides reading, writing,
    header inspection and validation.
    """

    format_name: ClassVar[str]
    extensions: ClassVar[list[str]]
    magic: ClassVar[bytes]

    def can_handle(self, file_path: Path) -> bool:
        """
        Check whether the file starts with this format's magic bytes.

        Parameters
        ----------
        file_path : Path
            Path to file

        Returns
        -------
        bool
            True if the handler can process this file
        """
        try:
            with open(file_path, "rb") as f:
                return f.read(len(self.magic)) == self.magic
        except OSError:
            return False

    @abstractmethod
    def read(self, file_path: Path) -> Any:
        """Parse a file into its in-memory object."""
        ...

    @abstractmethod
    def write(self, obj: Any, file_path: Path) -> Path:
        """Serialise ``obj`` atomically to ``file_path``."""
        ...

    @abstractmethod
    def extract_metadata(self, file_path: Path) -> dict[str, Any]:
        """
        Extract header metadata from a file.

        Parameters
        ----------
        file_path : Path
            Path to file

        Returns
        -------
        dict[str, Any]
            Header fields
        """
        ...

    def validate(self, file_path: Path) -> bool:
        """
        Validate file integrity by parsing it completely.

        Parameters
        ----------
        file_path : Path
            Path to file

        Returns
        -------
        bool
            True if the file parses without violating the format
        """
        try:
            self.read(file_path)
        except FormatError:
            return False
        return True


class IORegistry:
    """
    Registry for file format handlers.

    Selects the handler by file extension, falling back to the magic bytes.

    Examples
    --------
    >>> from evidential_ogm.io.ogm import OgmFileIO
    >>> registry = IORegistry()
    >>> registry.register(OgmFileIO())
    >>> registry.get_handler("label.eogm").format_name
    'ogm'
    """

    def __init__(self) -> None:
        """Initialize empty registry."""
        self._handlers: dict[str, FileIOBase] = {}
        self._extension_map: dict[str, str] = {}

    def register(self, handler: FileIOBase) -> None:
        """
        Register a file format handler.

        Parameters
        ----------
        handler : FileIOBase
            Handler instance to register
        """
        format_name = handler.format_name
        self._handlers[format_name] = handler
        for ext in handler.extensions:
            self._extension_map[ext.lower()] = format_name

    def get_handler(self, file_path: str | Path) -> FileIOBase | None:
        """
        Get the handler for a file.

        Parameters
        ----------
        file_path : str | Path
            Path to file

        Returns
        -------
        FileIOBase | None
            Handler instance or None if no handler matches
        """
        path = Path(file_path)
        ext = path.suffix.lower()
        if ext in self._extension_map:
            return self._handlers[self._extension_map[ext]]
        for handler in self._handlers.values():
            if handler.can_handle(path):
                return handler
        return None

    def list_formats(self) -> list[str]:
        """Registered format names."""
        return list(self._handlers.keys())

    def list_extensions(self) -> list[str]:
        """All supported file extensions."""
        return list(self._extension_map.keys())
