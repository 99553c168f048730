"""Crisp evidential labels from annotated samples."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from evidential_ogm.config import AnnotationLabelConfig
from evidential_ogm.constants import MASS_CHANNELS, Hypothesis
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import CHANNEL_INDEX
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.labels.geometry import BevBox, footprint_mask, points_in_rotated_rect
from evidential_ogm.labels.occlusion import occlusion_mask

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.spec import GridSpec
    from evidential_ogm.pointcloud import PointCloud

__all__ = [
    "AnnotatedSample",
    "dynamic_footprint",
    "generate_label_from_annotations",
    "points_in_box",
]


@dataclass(frozen=True, slots=True, eq=False)
class AnnotatedSample:
    """
    Lidar sweep with dynamic-object boxes and a drivable-surface raster.

    Attributes
    ----------
    cloud : PointCloud
        Ego-frame points.
    boxes : tuple[BevBox, ...]
        Footprints of dynamic-class objects.
    drivable_map : ndarray of bool
        ``(rows, cols)`` raster aligned to the target grid, True on drivable
        surface.
    sensor_origin : tuple[float, float]
        Sensor ``(x, y)`` in the ego frame.
    """

    cloud: PointCloud
    boxes: tuple[BevBox, ...]
    drivable_map: NDArray[np.bool_]
    sensor_origin: tuple[float, float] = (0.0, 0.0)
    name: str = field(default="sample")

    def __post_init__(self) -> None:
        drivable = np.array(self.drivable_map, dtype=bool)
        if drivable.ndim != 2:
            msg = f"drivable map must be 2D, got shape {drivable.shape}"
            raise DomainError(msg)
        drivable.setflags(write=False)
        object.__setattr__(self, "drivable_map", drivable)
        object.__setattr__(self, "boxes", tuple(self.boxes))


def points_in_box(cloud: PointCloud, box: BevBox) -> int:
    """
    Number of points whose ``(x, y)`` lies in the box footprint.

    ``z`` is ignored and points on an edge count as inside.

    Examples
    --------
    >>> from evidential_ogm.pointcloud import PointCloud
    >>> cloud = PointCloud.from_xyz([[0.0, 0.0, 0.0], [2.0, 2.0, 0.0]])
    >>> points_in_box(cloud, BevBox(center_x=0, center_y=0, length_m=1, width_m=1))
    1
    """
    if len(cloud) == 0:
        return 0
    return int(np.count_nonzero(points_in_rotated_rect(cloud.x, cloud.y, box)))


def dynamic_footprint(
    sample: AnnotatedSample,
    spec: GridSpec,
    config: AnnotationLabelConfig,
) -> NDArray[np.bool_]:
    """Union of the footprints of boxes holding at least ``config.min_points`` points."""
    covered = np.zeros(spec.shape, dtype=bool)
    for box in sample.boxes:
        count = points_in_box(sample.cloud, box)
        if count < config.min_points:
            logger.debug(
                f"box {box.object_id}: {count} points < {config.min_points}, ignored"
            )
            continue
        covered |= footprint_mask(spec, box, config.coverage)
    return covered


def generate_label_from_annotations(
    sample: AnnotatedSample,
    spec: GridSpec,
    config: AnnotationLabelConfig | None = None,
) -> EvidentialGrid:
    """
    Crisp label grid for one annotated sample.

    Cells under a box with enough points get ``m(O_d) = 1``; the remaining
    drivable cells get ``m(F) = 1`` and every other cell ``m(O_s) = 1``.
    Cells hidden behind ``O_s`` or ``O_d`` cells as seen from the sensor are
    then set to ``m(Θ) = 1``, except the dynamic cells.

    Raises
    ------
    DomainError
        If the drivable map does not match the grid dimensions or the sensor
        lies outside the grid.
    """
    config = config or AnnotationLabelConfig()
    if sample.drivable_map.shape != spec.shape:
        msg = (
            f"drivable map has shape {sample.drivable_map.shape}, "
            f"grid is {spec.shape}"
        )
        raise DomainError(msg)
    dynamic = dynamic_footprint(sample, spec, config)
    free = sample.drivable_map & ~dynamic
    static = ~sample.drivable_map & ~dynamic

    masses = np.zeros((*spec.shape, len(MASS_CHANNELS)), dtype=np.float64)
    masses[dynamic, CHANNEL_INDEX[Hypothesis.O_D]] = 1.0
    masses[free, CHANNEL_INDEX[Hypothesis.F]] = 1.0
    masses[static, CHANNEL_INDEX[Hypothesis.O_S]] = 1.0
    grid = EvidentialGrid(spec, masses)
    logger.debug(
        f"{sample.name}: {int(dynamic.sum())} dynamic, {int(free.sum())} free, "
        f"{int(static.sum())} static cells before masking"
    )
    return occlusion_mask(grid, sample.sensor_origin, spec, protected=dynamic)
