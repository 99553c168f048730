"""Hashing utilities for fingerprinting scenes and emitted files."""

from __future__ import annotations

import hashlib
import json
from os import PathLike
from typing import Any

__all__ = ["canonical_hash", "content_hash", "file_hash"]

# Try blake3 first, fall back to sha256
try:
    import blake3  # type: ignore[import-untyped]
    HAS_BLAKE3 = True
except ImportError:
    HAS_BLAKE3 = False


def content_hash(data: bytes) -> str:
    """
    Compute the content hash of raw bytes.

    Uses blake3 if available, otherwise sha256.

    Parameters
    ----------
    data : bytes
        Content to hash

    Returns
    -------
    str
        Hexadecimal digest prefixed with the algorithm (``blake3:`` or ``sha256:``)

    Examples
    --------
    >>> content_hash(b"EOGM") == content_hash(b"EOGM")
    True
    >>> content_hash(b"EOGM").startswith(("blake3:", "sha256:"))
    True
    """
    if HAS_BLAKE3:
        return f"blake3:{blake3.blake3(data).hexdigest()}"
    return f"sha256:{hashlib.sha256(data).hexdigest()}"


def file_hash(path: str | PathLike[str]) -> str:
    """Content hash of a file on disk."""
    with open(path, "rb") as f:
        return content_hash(f.read())


def canonical_hash(document: Any) -> str:
    """
    Hash a JSON-serializable document independent of key order.

    Parameters
    ----------
    document : Any
        JSON-compatible value, e.g. ``Scene.model_dump(mode="json")``

    Returns
    -------
    str
        Prefixed hexadecimal digest, see :func:`content_hash`

    Examples
    --------
    >>> canonical_hash({"a": 1, "b": 2}) == canonical_hash({"b": 2, "a": 1})
    True
    """
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return content_hash(canonical.encode())
