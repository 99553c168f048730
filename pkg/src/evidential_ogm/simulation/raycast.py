"""Vectorised ray casting against planar patches and oriented boxes.

All rays of a sensor share the mount position, so every primitive is
intersected with a whole chunk of directions at once. The nearest
intersection wins; on exact ties the earlier primitive (patches, then static
boxes, then dynamic boxes, each in scene order) is kept.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from evidential_ogm.constants import CloudFrame, Material
from evidential_ogm.pointcloud import PointCloud

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.simulation.scene import Box, GroundPatch, LidarConfig, Scene

__all__ = ["NO_OBJECT", "RayHit", "RayHits", "cast_rays"]

NO_OBJECT = -1

# Intersections closer than this to the sensor are ignored.
_MIN_RANGE = 1e-9
_CHUNK_RAYS = 1 << 18


@dataclass(frozen=True, slots=True)
class RayHit:
    """One reflection."""

    point: tuple[float, float, float]
    material: Material
    object_id: int | None
    ring: int
    azimuth_index: int
    range: float


@dataclass(frozen=True, slots=True, eq=False)
class RayHits:
    """
    Reflections of one sensor sweep as parallel arrays, in ray order.

    ``object_id`` is :data:`NO_OBJECT` for reflections off patches and static
    boxes.
    """

    points: NDArray[np.float64]
    ranges: NDArray[np.float64]
    material: NDArray[np.int8]
    object_id: NDArray[np.int64]
    ring: NDArray[np.int64]
    azimuth_index: NDArray[np.int64]

    @classmethod
    def empty(cls) -> RayHits:
        return cls(
            points=np.zeros((0, 3)),
            ranges=np.zeros(0),
            material=np.zeros(0, dtype=np.int8),
            object_id=np.zeros(0, dtype=np.int64),
            ring=np.zeros(0, dtype=np.int64),
            azimuth_index=np.zeros(0, dtype=np.int64),
        )

    def __len__(self) -> int:
        return len(self.ranges)

    def __iter__(self) -> Iterator[RayHit]:
        for k in range(len(self)):
            oid = int(self.object_id[k])
            yield RayHit(
                point=(
                    float(self.points[k, 0]),
                    float(self.points[k, 1]),
                    float(self.points[k, 2]),
                ),
                material=Material(int(self.material[k])),
                object_id=None if oid == NO_OBJECT else oid,
                ring=int(self.ring[k]),
                azimuth_index=int(self.azimuth_index[k]),
                range=float(self.ranges[k]),
            )

    def hit_count(self, object_id: int) -> int:
        return int(np.count_nonzero(self.object_id == object_id))

    def to_point_cloud(self) -> PointCloud:
        """Ego-frame cloud with the constant material intensities."""
        intensity = np.array([m.intensity for m in Material])[self.material]
        return PointCloud.from_xyz(
            self.points, intensity=intensity, ring=self.ring, frame=CloudFrame.EGO
        )


def _patch_range(
    patch: GroundPatch, origin: NDArray[np.float64], dirs: NDArray[np.float64]
) -> NDArray[np.float64]:
    # o + t d on the plane z = z0 + sx x + sy y
    numerator = patch.z0 + patch.slope_x * origin[0] + patch.slope_y * origin[1] - origin[2]
    denominator = dirs[:, 2] - patch.slope_x * dirs[:, 0] - patch.slope_y * dirs[:, 1]
    t = np.full(len(dirs), np.inf)
    np.divide(numerator, denominator, out=t, where=np.abs(denominator) > 1e-12)
    t[t <= _MIN_RANGE] = np.inf
    candidate = np.isfinite(t)
    if not candidate.any():
        return t
    px = origin[0] + t[candidate] * dirs[candidate, 0]
    py = origin[1] + t[candidate] * dirs[candidate, 1]
    inside = np.zeros(len(px), dtype=bool)
    vertices = patch.vertices
    for (x1, y1), (x2, y2) in zip(vertices, vertices[1:] + vertices[:1], strict=True):
        # even-odd rule
        if y1 == y2:
            continue
        crosses = (y1 > py) != (y2 > py)
        x_edge = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < x_edge)
    hits = t[candidate]
    hits[~inside] = np.inf
    t[candidate] = hits
    return t


def _box_range(
    box: Box, origin: NDArray[np.float64], dirs: NDArray[np.float64]
) -> NDArray[np.float64]:
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    to_box = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    o = to_box @ (origin - np.asarray(box.center))
    d = dirs @ to_box.T
    half = np.asarray(box.size) / 2.0
    near = np.full(len(dirs), -np.inf)
    far = np.full(len(dirs), np.inf)
    for axis in range(3):
        da = d[:, axis]
        moving = da != 0.0
        t1 = np.full(len(dirs), -np.inf)
        t2 = np.full(len(dirs), np.inf)
        np.divide(-half[axis] - o[axis], da, out=t1, where=moving)
        np.divide(half[axis] - o[axis], da, out=t2, where=moving)
        if not -half[axis] <= o[axis] <= half[axis]:
            # parallel rays outside the slab never enter the box
            t1[~moving] = np.inf
            t2[~moving] = np.inf
        near = np.maximum(near, np.minimum(t1, t2))
        far = np.minimum(far, np.maximum(t1, t2))
    t = np.where((near <= far) & (near > _MIN_RANGE), near, np.inf)
    return t


def cast_rays(
    scene: Scene,
    config: LidarConfig,
    rng: np.random.Generator | None = None,
) -> RayHits:
    """
    Cast one ray per (layer, azimuth) pair and keep the nearest reflection.

    Parameters
    ----------
    scene : Scene
        Geometry to intersect.
    config : LidarConfig
        Sensor; rays are ordered ``layer * azimuth_steps + azimuth``.
    rng : numpy.random.Generator, optional
        Source for the sensor's dropout and range noise. Without it the sweep
        is noise-free.

    Returns
    -------
    RayHits
        Reflections within ``config.max_range``, in ray order.
    """
    primitives: list[tuple[object, Material, int]] = [
        (patch, patch.material, NO_OBJECT) for patch in scene.patches
    ]
    primitives += [(box, box.material, NO_OBJECT) for box in scene.static_boxes]
    primitives += [(box, box.material, box.object_id) for box in scene.dynamic_boxes]
    if not primitives:
        return RayHits.empty()
    patch_count = len(scene.patches)
    materials = np.array([m for _, m, _ in primitives], dtype=np.int8)
    object_ids = np.array([oid for _, _, oid in primitives], dtype=np.int64)
    origin = config.mount_pose.position

    parts: list[tuple[NDArray, ...]] = []
    for start in range(0, config.ray_count, _CHUNK_RAYS):
        stop = min(start + _CHUNK_RAYS, config.ray_count)
        dirs = config.ray_directions(start, stop)
        best = np.full(len(dirs), np.inf)
        owner = np.full(len(dirs), -1, dtype=np.int64)
        for k, (primitive, _, _) in enumerate(primitives):
            if k < patch_count:
                t = _patch_range(primitive, origin, dirs)  # type: ignore[arg-type]
            else:
                t = _box_range(primitive, origin, dirs)  # type: ignore[arg-type]
            closer = t < best
            best[closer] = t[closer]
            owner[closer] = k
        hit = best <= config.max_range
        ray = np.arange(start, stop)[hit]
        parts.append((ray, best[hit], dirs[hit], owner[hit]))

    ray = np.concatenate([p[0] for p in parts])
    ranges = np.concatenate([p[1] for p in parts])
    dirs = np.concatenate([p[2] for p in parts])
    owner = np.concatenate([p[3] for p in parts])

    if rng is not None and config.has_noise:
        keep = rng.random(len(ray)) >= config.dropout_probability
        jitter = rng.normal(0.0, config.range_noise_std_m, size=len(ray))
        ranges = np.clip(ranges + jitter, 0.0, None)
        ray, ranges, dirs, owner = ray[keep], ranges[keep], dirs[keep], owner[keep]
        logger.debug(f"sensor noise dropped {np.count_nonzero(~keep)} returns")

    ring, azimuth_index = np.divmod(ray, config.azimuth_steps)
    logger.debug(f"{len(ray)} of {config.ray_count} rays returned")
    return RayHits(
        points=origin + ranges[:, None] * dirs,
        ranges=ranges,
        material=materials[owner],
        object_id=object_ids[owner],
        ring=ring,
        azimuth_index=azimuth_index,
    )
