"""Utility functions for evidential_ogm."""

from evidential_ogm.utils.hashing import canonical_hash, content_hash, file_hash

__all__ = ["canonical_hash", "content_hash", "file_hash"]
