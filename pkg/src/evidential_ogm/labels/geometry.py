"""Oriented bird's-eye-view boxes and their rasterisation."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from evidential_ogm.config import CoverageMode
    from evidential_ogm.grid.spec import GridSpec

__all__ = ["BOUNDARY_TOLERANCE", "BevBox", "footprint_mask", "points_in_rotated_rect"]

# Points this close to an edge count as inside.
BOUNDARY_TOLERANCE = 1e-9


class BevBox(BaseModel):
    """
    Yawed rectangle in the ground plane.

    ``length_m`` runs along the heading ``yaw`` (radians, counter-clockwise
    from +x) and ``width_m`` across it.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    center_x: float
    center_y: float
    length_m: float = Field(gt=0)
    width_m: float = Field(gt=0)
    yaw: float = 0.0
    object_id: int | None = None

    def corners(self) -> NDArray[np.float64]:
        """``(4, 2)`` corners, counter-clockwise starting front-left."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hl, hw = self.length_m / 2.0, self.width_m / 2.0
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.center_x, self.center_y])


def points_in_rotated_rect(x: ArrayLike, y: ArrayLike, box: BevBox) -> NDArray[np.bool_]:
    """
    Boundary-inclusive point-in-rectangle test.

    Examples
    --------
    >>> box = BevBox(center_x=0.0, center_y=0.0, length_m=1.0, width_m=1.0)
    >>> points_in_rotated_rect([0.0, 0.5, 2.0], [0.0, 0.5, 2.0], box).tolist()
    [True, True, False]
    """
    dx = np.asarray(x, dtype=np.float64) - box.center_x
    dy = np.asarray(y, dtype=np.float64) - box.center_y
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    along = c * dx + s * dy
    across = -s * dx + c * dy
    return (np.abs(along) <= box.length_m / 2.0 + BOUNDARY_TOLERANCE) & (
        np.abs(across) <= box.width_m / 2.0 + BOUNDARY_TOLERANCE
    )


def _overlap_mask(spec: GridSpec, box: BevBox) -> NDArray[np.bool_]:
    # Separating axis test between every cell square and the box; touching
    # along an edge or at a corner is not overlap.
    xs, ys = spec.cell_centers()
    cx, cy = np.meshgrid(xs, ys, indexing="ij")
    half_cell = spec.cell_size_m / 2.0
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    hl, hw = box.length_m / 2.0, box.width_m / 2.0
    dx = box.center_x - cx
    dy = box.center_y - cy
    separated = np.zeros(cx.shape, dtype=bool)
    for ax, ay in ((1.0, 0.0), (0.0, 1.0), (c, s), (-s, c)):
        box_radius = hl * abs(c * ax + s * ay) + hw * abs(-s * ax + c * ay)
        cell_radius = half_cell * (abs(ax) + abs(ay))
        distance = np.abs(dx * ax + dy * ay)
        separated |= distance >= box_radius + cell_radius - BOUNDARY_TOLERANCE
    return ~separated


def footprint_mask(
    spec: GridSpec, box: BevBox, coverage: CoverageMode = "center"
) -> NDArray[np.bool_]:
    """
    Cells covered by a box.

    Parameters
    ----------
    spec : GridSpec
        Target raster.
    box : BevBox
        Footprint.
    coverage : {"center", "overlap"}
        ``center`` selects cells whose centre lies inside the box (boundary
        inclusive); ``overlap`` selects cells sharing a positive area with it.

    Returns
    -------
    ndarray of bool
        ``(rows, cols)`` mask.
    """
    if coverage == "overlap":
        return _overlap_mask(spec, box)
    xs, ys = spec.cell_centers()
    cx, cy = np.meshgrid(xs, ys, indexing="ij")
    return points_in_rotated_rect(cx, cy, box)
