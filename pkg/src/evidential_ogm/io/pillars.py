"""
Pillar tensors for external trainers.

A pillar is the column of points above one grid cell. :func:`pillarize`
turns a cloud into the dense ``(P, N, 9)`` input of a pillar feature
encoder and EPIL files store the result.

EPIL layout, all little-endian::

    magic         4s   b"EPIL"
    version       u16  1
    rows, cols    u32  grid dimensions
    P, N, D       u32  max pillars, max points per pillar, features (9)
    pillar_count  u32
    features      P * N * D f32
    indices       pillar_count u32, flat cell index row * cols + col
    counts        pillar_count u32, kept points per pillar
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np
from loguru import logger

from evidential_ogm.errors import DomainError, InvariantViolationError, TruncatedFileError
from evidential_ogm.io.base import FileIOBase, atomic_write_bytes, unpack_header

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.spec import GridSpec
    from evidential_ogm.pointcloud import PointCloud

__all__ = [
    "DEFAULT_MAX_PILLARS",
    "DEFAULT_MAX_POINTS",
    "PILLAR_FEATURES",
    "PILLAR_HEADER",
    "PILLAR_MAGIC",
    "PillarFileIO",
    "PillarTensor",
    "decode_pillars",
    "encode_pillars",
    "pillarize",
    "read_pillars",
    "write_pillars",
]

PILLAR_MAGIC = b"EPIL"
PILLAR_VERSION = 1
PILLAR_HEADER = struct.Struct("<4sHIIIIII")
PILLAR_FEATURES = (
    "x",
    "y",
    "z",
    "intensity",
    "dx_mean",
    "dy_mean",
    "dz_mean",
    "dx_center",
    "dy_center",
)
DEFAULT_MAX_PILLARS = 12000
DEFAULT_MAX_POINTS = 32


@dataclass(frozen=True, slots=True, eq=False)
class PillarTensor:
    """
    Dense pillar features of one cloud.

    Attributes
    ----------
    features : ndarray of float32
        ``(max_pillars, max_points, 9)``; unused slots are zero.
    indices : ndarray of uint32
        Flat cell index of each filled pillar, strictly ascending.
    counts : ndarray of uint32
        Points kept in each filled pillar.
    """

    features: NDArray[np.float32]
    indices: NDArray[np.uint32]
    counts: NDArray[np.uint32]
    rows: int
    cols: int

    def __post_init__(self) -> None:
        dtypes = (("features", np.float32), ("indices", np.uint32), ("counts", np.uint32))
        for name, dtype in dtypes:
            array = np.array(getattr(self, name), dtype=dtype)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if self.features.ndim != 3 or self.features.shape[2] != len(PILLAR_FEATURES):
            msg = f"features must be (P, N, {len(PILLAR_FEATURES)}), got {self.features.shape}"
            raise DomainError(msg)
        if self.indices.shape != self.counts.shape or len(self.indices) > self.max_pillars:
            msg = "indices and counts must have one entry per filled pillar"
            raise DomainError(msg)

    @property
    def max_pillars(self) -> int:
        return self.features.shape[0]

    @property
    def max_points(self) -> int:
        return self.features.shape[1]

    @property
    def pillar_count(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PillarTensor):
            return NotImplemented
        return (
            (self.rows, self.cols) == (other.rows, other.cols)
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None  # type: ignore[assignment]


def pillarize(
    cloud: PointCloud,
    spec: GridSpec,
    max_pillars: int = DEFAULT_MAX_PILLARS,
    max_points: int = DEFAULT_MAX_POINTS,
) -> PillarTensor:
    """
    Bucket points by grid cell and build per-point pillar features.

    Each point gets ``x, y, z, intensity``, its offset to the mean of the
    kept points of its pillar and its ``x, y`` offset to the cell centre.
    When more than ``max_pillars`` cells are occupied, the pillars with the
    most points are kept (ties by lower cell index). Within a pillar the
    first ``max_points`` points in input order are kept. Filled pillars are
    stored by ascending cell index; points outside the grid are ignored.

    Raises
    ------
    DomainError
        If ``max_pillars`` or ``max_points`` is below 1.

    Examples
    --------
    >>> from evidential_ogm.grid.spec import GridSpec
    >>> from evidential_ogm.pointcloud import PointCloud
    >>> spec = GridSpec(length_m=2.0, width_m=2.0, cell_size_m=0.5)
    >>> cloud = PointCloud.from_xyz([[0.25, 0.25, 1.0]])
    >>> tensor = pillarize(cloud, spec, max_pillars=4, max_points=2)
    >>> tensor.features.shape, tensor.indices.tolist()
    ((4, 2, 9), [10])
    >>> tensor.features[0, 0, 4:].tolist()
    [0.0, 0.0, 0.0, 0.0, 0.0]
    """
    if max_pillars < 1 or max_points < 1:
        msg = f"max_pillars and max_points must be >= 1, got {max_pillars}, {max_points}"
        raise DomainError(msg)

    features = np.zeros((max_pillars, max_points, len(PILLAR_FEATURES)), dtype=np.float32)
    points = cloud.points.astype(np.float64)
    rows, cols, valid = spec.points_to_cells(points[:, 0], points[:, 1])
    if not valid.all():
        logger.debug(f"{int((~valid).sum())} points outside the grid ignored")
    points = points[valid]
    flat = rows[valid] * spec.cols + cols[valid]
    if len(flat) == 0:
        empty = np.zeros(0, np.uint32)
        return PillarTensor(features, empty, empty, spec.rows, spec.cols)

    order = np.argsort(flat, kind="stable")
    cells, starts, totals = np.unique(flat[order], return_index=True, return_counts=True)

    selected = np.arange(len(cells))
    if len(cells) > max_pillars:
        ranking = np.lexsort((cells, -totals))
        selected = np.sort(ranking[:max_pillars])
        logger.warning(
            f"{len(cells) - max_pillars} of {len(cells)} pillars dropped "
            f"(max_pillars={max_pillars})"
        )
    slot_of = np.full(len(cells), -1, dtype=np.int64)
    slot_of[selected] = np.arange(len(selected))

    pillar = np.repeat(np.arange(len(cells)), totals)
    rank = np.arange(len(order)) - starts[pillar]
    keep = (rank < max_points) & (slot_of[pillar] >= 0)
    dropped = int(np.count_nonzero((rank >= max_points) & (slot_of[pillar] >= 0)))
    if dropped:
        logger.warning(f"{dropped} points dropped from full pillars (max_points={max_points})")

    kept_points = points[order[keep]]
    slot = slot_of[pillar[keep]]
    position = rank[keep]
    kept = np.bincount(slot, minlength=len(selected))
    means = np.stack(
        [np.bincount(slot, weights=kept_points[:, i], minlength=len(selected)) for i in range(3)],
        axis=-1,
    ) / kept[:, None]

    kept_cells = cells[selected]
    center_x = spec.x_min + (kept_cells // spec.cols + 0.5) * spec.cell_size_m
    center_y = spec.y_min + (kept_cells % spec.cols + 0.5) * spec.cell_size_m

    values = np.empty((len(kept_points), len(PILLAR_FEATURES)), dtype=np.float64)
    values[:, :4] = kept_points[:, :4]
    values[:, 4:7] = kept_points[:, :3] - means[slot]
    values[:, 7] = kept_points[:, 0] - center_x[slot]
    values[:, 8] = kept_points[:, 1] - center_y[slot]
    features[slot, position] = values.astype(np.float32)

    logger.debug(f"pillarized {len(kept_points)} points into {len(selected)} pillars")
    return PillarTensor(
        features,
        kept_cells.astype(np.uint32),
        kept.astype(np.uint32),
        spec.rows,
        spec.cols,
    )


def encode_pillars(tensor: PillarTensor) -> bytes:
    header = PILLAR_HEADER.pack(
        PILLAR_MAGIC,
        PILLAR_VERSION,
        tensor.rows,
        tensor.cols,
        tensor.max_pillars,
        tensor.max_points,
        len(PILLAR_FEATURES),
        tensor.pillar_count,
    )
    return b"".join(
        (
            header,
            tensor.features.astype("<f4").tobytes(),
            tensor.indices.astype("<u4").tobytes(),
            tensor.counts.astype("<u4").tobytes(),
        )
    )


def decode_pillars(data: bytes, path: Path | None = None) -> PillarTensor:
    """
    Parse EPIL bytes.

    Raises
    ------
    BadMagicError, UnsupportedVersionError, TruncatedFileError
        On a malformed header or short payload.
    InvariantViolationError
        On inconsistent dimensions, bad indices or counts, or trailing bytes.
    """
    rows, cols, max_pillars, max_points, feature_count, pillar_count = unpack_header(
        data, PILLAR_HEADER, PILLAR_MAGIC, PILLAR_VERSION, path
    )
    if feature_count != len(PILLAR_FEATURES):
        raise InvariantViolationError(
            f"expected {len(PILLAR_FEATURES)} features, header says {feature_count}", path
        )
    if min(rows, cols, max_pillars, max_points) < 1:
        raise InvariantViolationError("grid and tensor dimensions must be >= 1", path)
    if pillar_count > max_pillars:
        raise InvariantViolationError(
            f"{pillar_count} pillars exceed max_pillars={max_pillars}", path
        )

    feature_bytes = max_pillars * max_points * feature_count * 4
    expected = feature_bytes + 2 * pillar_count * 4
    payload = data[PILLAR_HEADER.size :]
    if len(payload) < expected:
        raise TruncatedFileError(
            f"payload has {len(payload)} bytes, header declares {expected}", path
        )
    if len(payload) > expected:
        raise InvariantViolationError(
            f"{len(payload) - expected} trailing bytes after payload", path
        )

    features = np.frombuffer(
        payload, dtype="<f4", count=max_pillars * max_points * feature_count
    )
    indices = np.frombuffer(payload, dtype="<u4", count=pillar_count, offset=feature_bytes)
    counts = np.frombuffer(
        payload, dtype="<u4", count=pillar_count, offset=feature_bytes + pillar_count * 4
    )
    if not np.all(np.isfinite(features)):
        raise InvariantViolationError("non-finite pillar features", path)
    if np.any(indices >= rows * cols):
        raise InvariantViolationError(f"pillar index outside {rows}x{cols} grid", path)
    if np.any(np.diff(indices.astype(np.int64)) <= 0):
        raise InvariantViolationError("pillar indices must be strictly ascending", path)
    if np.any(counts < 1) or np.any(counts > max_points):
        raise InvariantViolationError(f"pillar counts must lie in [1, {max_points}]", path)
    return PillarTensor(
        features.reshape(max_pillars, max_points, feature_count),
        indices,
        counts,
        rows,
        cols,
    )


def write_pillars(path: str | Path, tensor: PillarTensor) -> Path:
    return atomic_write_bytes(path, encode_pillars(tensor))


def read_pillars(path: str | Path) -> PillarTensor:
    path = Path(path)
    return decode_pillars(path.read_bytes(), path)


class PillarFileIO(FileIOBase):
    """Handler for ``.epil`` pillar tensor files."""

    format_name: ClassVar[str] = "pillars"
    extensions: ClassVar[list[str]] = [".epil"]
    magic: ClassVar[bytes] = PILLAR_MAGIC

    def read(self, file_path: Path) -> PillarTensor:
        return read_pillars(file_path)

    def write(self, obj: PillarTensor, file_path: Path) -> Path:
        return write_pillars(file_path, obj)

    def extract_metadata(self, file_path: Path) -> dict[str, Any]:
        path = Path(file_path)
        with open(path, "rb") as f:
            head = f.read(PILLAR_HEADER.size)
        rows, cols, max_pillars, max_points, feature_count, pillar_count = unpack_header(
            head, PILLAR_HEADER, PILLAR_MAGIC, PILLAR_VERSION, path
        )
        return {
            "format": self.format_name,
            "version": PILLAR_VERSION,
            "rows": rows,
            "cols": cols,
            "max_pillars": max_pillars,
            "max_points": max_points,
            "features": feature_count,
            "pillars": pillar_count,
        }
