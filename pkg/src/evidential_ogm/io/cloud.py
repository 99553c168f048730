"""EPCL: binary point cloud files.

Layout, all little-endian::

    magic    4s   b"EPCL"
    version  u16  1
    count    u64
    records  count * (x, y, z, intensity, ring) f32, 20 bytes each

Points are always in the ego frame.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Any, ClassVar

import numpy as np

from evidential_ogm.constants import CloudFrame
from evidential_ogm.errors import DomainError, InvariantViolationError, TruncatedFileError
from evidential_ogm.io.base import FileIOBase, atomic_write_bytes, unpack_header
from evidential_ogm.pointcloud import POINT_FIELDS, PointCloud

__all__ = [
    "CLOUD_HEADER",
    "CLOUD_MAGIC",
    "CLOUD_VERSION",
    "CloudFileIO",
    "decode_cloud",
    "encode_cloud",
    "read_cloud",
    "write_cloud",
]

CLOUD_MAGIC = b"EPCL"
CLOUD_VERSION = 1
CLOUD_HEADER = struct.Struct("<4sHQ")
RECORD_DTYPE = np.dtype("<f4")
RECORD_SIZE = len(POINT_FIELDS) * RECORD_DTYPE.itemsize


def encode_cloud(cloud: PointCloud) -> bytes:
    if cloud.frame is not CloudFrame.EGO:
        msg = "EPCL files store ego-frame clouds only"
        raise DomainError(msg)
    header = CLOUD_HEADER.pack(CLOUD_MAGIC, CLOUD_VERSION, len(cloud))
    return header + cloud.points.astype(RECORD_DTYPE).tobytes()


def decode_cloud(data: bytes, path: Path | None = None) -> PointCloud:
    (count,) = unpack_header(data, CLOUD_HEADER, CLOUD_MAGIC, CLOUD_VERSION, path)
    payload = data[CLOUD_HEADER.size :]
    expected = count * RECORD_SIZE
    if len(payload) < expected:
        raise TruncatedFileError(
            f"{len(payload)} payload bytes for {count} points ({expected} needed)", path
        )
    if len(payload) > expected:
        raise InvariantViolationError(
            f"{len(payload) - expected} trailing bytes after {count} points", path
        )
    points = np.frombuffer(payload, dtype=RECORD_DTYPE).reshape(count, len(POINT_FIELDS))
    if not np.all(np.isfinite(points)):
        raise InvariantViolationError("non-finite point coordinates", path)
    ring = points[:, 4]
    if np.any(ring < 0) or np.any(ring != np.floor(ring)):
        raise InvariantViolationError("ring indices must be non-negative integers", path)
    return PointCloud(points.astype(np.float32), CloudFrame.EGO)


def write_cloud(path: str | Path, cloud: PointCloud) -> Path:
    """Write an ego-frame cloud atomically."""
    return atomic_write_bytes(path, encode_cloud(cloud))


def read_cloud(path: str | Path) -> PointCloud:
    path = Path(path)
    return decode_cloud(path.read_bytes(), path)


class CloudFileIO(FileIOBase):
    """Handler for ``.epcl`` point cloud files."""

    format_name: ClassVar[str] = "cloud"
    extensions: ClassVar[list[str]] = [".epcl"]
    magic: ClassVar[bytes] = CLOUD_MAGIC

    def read(self, file_path: Path) -> PointCloud:
        return read_cloud(file_path)

    def write(self, obj: PointCloud, file_path: Path) -> Path:
        return write_cloud(file_path, obj)

    def extract_metadata(self, file_path: Path) -> dict[str, Any]:
        path = Path(file_path)
        with open(path, "rb") as f:
            head = f.read(CLOUD_HEADER.size)
        (count,) = unpack_header(head, CLOUD_HEADER, CLOUD_MAGIC, CLOUD_VERSION, path)
        return {
            "format": self.format_name,
            "version": CLOUD_VERSION,
            "points": count,
            "record_bytes": RECORD_SIZE,
            "payload_bytes": path.stat().st_size - CLOUD_HEADER.size,
        }
