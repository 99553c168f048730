"""Lidar point cloud container."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from evidential_ogm.constants import CloudFrame
from evidential_ogm.errors import DomainError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

__all__ = ["POINT_FIELDS", "PointCloud"]

POINT_FIELDS = ("x", "y", "z", "intensity", "ring")


@dataclass(frozen=True, slots=True, eq=False)
class PointCloud:
    """
    Points as an ``(n, 5)`` float32 array of ``x, y, z, intensity, ring``.

    The ring is the vertical channel index stored as a float, as in the
    on-disk record. Coordinates are metres in :attr:`frame`.
    """

    points: NDArray[np.float32]
    frame: CloudFrame = CloudFrame.EGO

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float32).reshape(-1, len(POINT_FIELDS))
        if not np.all(np.isfinite(points)):
            msg = "point cloud contains non-finite values"
            raise DomainError(msg)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def empty(cls, frame: CloudFrame = CloudFrame.EGO) -> PointCloud:
        return cls(np.zeros((0, len(POINT_FIELDS)), dtype=np.float32), frame)

    @classmethod
    def from_xyz(
        cls,
        xyz: ArrayLike,
        intensity: ArrayLike = 0.0,
        ring: ArrayLike = 0,
        frame: CloudFrame = CloudFrame.EGO,
    ) -> PointCloud:
        """Assemble a cloud from ``(n, 3)`` coordinates and broadcastable extras."""
        xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
        n = len(xyz)
        points = np.empty((n, len(POINT_FIELDS)), dtype=np.float32)
        points[:, :3] = xyz
        points[:, 3] = np.broadcast_to(np.asarray(intensity, dtype=np.float64), n)
        points[:, 4] = np.broadcast_to(np.asarray(ring, dtype=np.float64), n)
        return cls(points, frame)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.points, other.points)

    __hash__ = None  # type: ignore[assignment]

    @property
    def x(self) -> NDArray[np.float32]:
        return self.points[:, 0]

    @property
    def y(self) -> NDArray[np.float32]:
        return self.points[:, 1]

    @property
    def z(self) -> NDArray[np.float32]:
        return self.points[:, 2]

    @property
    def intensity(self) -> NDArray[np.float32]:
        return self.points[:, 3]

    @property
    def ring(self) -> NDArray[np.float32]:
        return self.points[:, 4]

    @property
    def xyz(self) -> NDArray[np.float32]:
        return self.points[:, :3]
