"""EOGM: binary evidential grid files.

Layout, all little-endian::

    magic      4s   b"EOGM"
    version    u16  1
    rows       u32
    cols       u32
    cell_size  f32  metres
    channels   u8   4
    payload    rows * cols * 4 f32, row-major (m_F, m_Os, m_Od, m_Osd)

``m(Θ)`` is implied as one minus the sum of the stored channels. Files always
describe grids centred on the ego origin.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Any, ClassVar

import numpy as np
from pydantic import ValidationError

from evidential_ogm.constants import MASS_CHANNELS
from evidential_ogm.errors import (
    DomainError,
    InvariantViolationError,
    TruncatedFileError,
)
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.io.base import FileIOBase, atomic_write_bytes, unpack_header

__all__ = [
    "OGM_HEADER",
    "OGM_MAGIC",
    "OGM_VERSION",
    "OgmFileIO",
    "decode_ogm",
    "encode_ogm",
    "read_ogm",
    "write_ogm",
]

OGM_MAGIC = b"EOGM"
OGM_VERSION = 1
OGM_HEADER = struct.Struct("<4sHIIfB")
STORED_CHANNELS = len(MASS_CHANNELS) - 1
_SUM_TOLERANCE = 1e-6
_CELL_SIZE_DECIMALS = 6


def _stored_masses(grid: EvidentialGrid) -> np.ndarray:
    """Float32 channels whose float64 sum never exceeds 1."""
    stored = grid.masses[..., :STORED_CHANNELS].astype("<f4")
    for _ in range(STORED_CHANNELS * 4):
        over = stored.astype(np.float64).sum(axis=-1) > 1.0
        if not over.any():
            break
        cells = stored[over]
        largest = np.argmax(cells, axis=-1)
        picked = np.take_along_axis(cells, largest[:, None], axis=-1)
        lowered = np.nextafter(picked, np.float32(0.0))
        np.put_along_axis(cells, largest[:, None], lowered, axis=-1)
        stored[over] = cells
    return stored


def encode_ogm(grid: EvidentialGrid) -> bytes:
    """Serialise a grid; masses are rounded to float32."""
    spec = grid.spec
    if not spec.is_ego_centered:
        msg = "EOGM files store ego-centred grids only"
        raise DomainError(msg)
    header = OGM_HEADER.pack(
        OGM_MAGIC, OGM_VERSION, spec.rows, spec.cols, spec.cell_size_m, STORED_CHANNELS
    )
    return header + _stored_masses(grid).tobytes()


def decode_ogm(data: bytes, path: Path | None = None) -> EvidentialGrid:
    """
    Parse EOGM bytes.

    Raises
    ------
    BadMagicError, UnsupportedVersionError, TruncatedFileError
        On a malformed header or short payload.
    InvariantViolationError
        On bad dimensions, trailing bytes or masses outside the simplex.
    """
    rows, cols, cell_size, channels = unpack_header(
        data, OGM_HEADER, OGM_MAGIC, OGM_VERSION, path
    )
    if channels != STORED_CHANNELS:
        raise InvariantViolationError(
            f"expected {STORED_CHANNELS} channels, header says {channels}", path
        )
    if rows < 1 or cols < 1:
        raise InvariantViolationError(f"empty grid {rows}x{cols}", path)
    if not (np.isfinite(cell_size) and cell_size > 0):
        raise InvariantViolationError(f"cell size {cell_size} is not positive", path)
    expected = rows * cols * STORED_CHANNELS * 4
    payload = data[OGM_HEADER.size :]
    if len(payload) < expected:
        raise TruncatedFileError(
            f"payload has {len(payload)} bytes, header declares {expected}", path
        )
    if len(payload) > expected:
        raise InvariantViolationError(
            f"{len(payload) - expected} trailing bytes after payload", path
        )

    stored = np.frombuffer(payload, dtype="<f4").reshape(rows, cols, STORED_CHANNELS)
    stored = stored.astype(np.float64)
    if not np.all(np.isfinite(stored)) or np.any(stored < 0.0) or np.any(stored > 1.0):
        raise InvariantViolationError("stored masses must lie in [0, 1]", path)
    total = stored.sum(axis=-1)
    if np.any(total > 1.0 + _SUM_TOLERANCE):
        raise InvariantViolationError("stored masses of a cell sum to more than 1", path)
    over = total > 1.0
    if over.any():
        stored[over] /= total[over][:, None]
        total = stored.sum(axis=-1)
    masses = np.empty((rows, cols, len(MASS_CHANNELS)), dtype=np.float64)
    masses[..., :STORED_CHANNELS] = stored
    masses[..., STORED_CHANNELS] = np.maximum(1.0 - total, 0.0)

    cell = round(float(cell_size), _CELL_SIZE_DECIMALS)
    try:
        spec = GridSpec(
            length_m=round(rows * cell, _CELL_SIZE_DECIMALS),
            width_m=round(cols * cell, _CELL_SIZE_DECIMALS),
            cell_size_m=cell,
        )
    except ValidationError as error:
        raise InvariantViolationError(f"grid geometry: {error}", path) from error
    return EvidentialGrid(spec, masses)


def write_ogm(path: str | Path, grid: EvidentialGrid) -> Path:
    """Write a grid to ``path`` atomically."""
    return atomic_write_bytes(path, encode_ogm(grid))


def read_ogm(path: str | Path) -> EvidentialGrid:
    """Read a grid written by :func:`write_ogm`."""
    path = Path(path)
    return decode_ogm(path.read_bytes(), path)


class OgmFileIO(FileIOBase):
    """Handler for ``.eogm`` evidential grid files."""

    format_name: ClassVar[str] = "ogm"
    extensions: ClassVar[list[str]] = [".eogm"]
    magic: ClassVar[bytes] = OGM_MAGIC

    def read(self, file_path: Path) -> EvidentialGrid:
        return read_ogm(file_path)

    def write(self, obj: EvidentialGrid, file_path: Path) -> Path:
        return write_ogm(file_path, obj)

    def extract_metadata(self, file_path: Path) -> dict[str, Any]:
        path = Path(file_path)
        with open(path, "rb") as f:
            head = f.read(OGM_HEADER.size)
        rows, cols, cell_size, channels = unpack_header(
            head, OGM_HEADER, OGM_MAGIC, OGM_VERSION, path
        )
        return {
            "format": self.format_name,
            "version": OGM_VERSION,
            "rows": rows,
            "cols": cols,
            "cell_size_m": round(float(cell_size), _CELL_SIZE_DECIMALS),
            "channels": channels,
            "payload_bytes": path.stat().st_size - OGM_HEADER.size,
        }
