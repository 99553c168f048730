"""Geometric inverse sensor model with a height-band ground model."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from evidential_ogm.config import IsmConfig
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import combine_free_static_supports
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.grid.traversal import supercover_batch

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.pointcloud import PointCloud

__all__ = ["geometric_ism", "ism_counts"]


def ism_counts(
    cloud: PointCloud,
    config: IsmConfig,
    spec: GridSpec,
) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """
    Free-ray and occupied-hit counts per cell.

    Every point casts a ray from the sensor cell to its own cell. Cells the
    ray passes before the endpoint get one free count. The endpoint is free
    for ground points and occupied for points above the band. A point beyond
    the grid edge contributes the in-grid part of its ray as free space and
    nothing else. Points below the band are ignored.
    """
    sensor = spec.world_to_cell(*config.sensor_xy)
    if sensor is None:
        msg = f"sensor position {config.sensor_xy} lies outside the grid"
        raise DomainError(msg)
    rows, cols = spec.shape
    free = np.zeros(rows * cols, dtype=np.int64)
    occupied = np.zeros(rows * cols, dtype=np.int64)

    z_min, z_max = config.ground_height_band
    z = np.asarray(cloud.z, dtype=np.float64)
    below = z < z_min
    if below.any():
        logger.warning(f"ignored {int(below.sum())} points below the ground band")
    r, c = spec.cell_indices(cloud.x, cloud.y)
    keep = np.isfinite(r) & np.isfinite(c) & ~below
    if not keep.any():
        return free.reshape(rows, cols), occupied.reshape(rows, cols)
    r, c = r[keep], c[keep]
    inside = (r >= 0) & (r < rows) & (c >= 0) & (c < cols)
    obstacle = (z[keep] > z_max) & inside
    if not inside.all():
        logger.debug(f"clipped {int((~inside).sum())} rays at the grid edge")
    ends = _end_cells(sensor, np.stack([r, c], axis=-1), rows + cols)

    rays = supercover_batch(sensor, ends)
    in_grid = (rays.rows >= 0) & (rays.rows < rows) & (rays.cols >= 0) & (rays.cols < cols)
    end_rows = ends[rays.ray, 0]
    end_cols = ends[rays.ray, 1]
    is_end = (rays.rows == end_rows) & (rays.cols == end_cols)
    free_entry = in_grid & ~(is_end & obstacle[rays.ray])
    flat = rays.rows * cols + rays.cols
    free += np.bincount(flat[free_entry], minlength=rows * cols)
    occupied += np.bincount(
        ends[obstacle, 0] * cols + ends[obstacle, 1], minlength=rows * cols
    )
    return free.reshape(rows, cols), occupied.reshape(rows, cols)


def _end_cells(
    sensor: tuple[int, int], ends: NDArray[np.float64], reach: int
) -> NDArray[np.int64]:
    """Integer end cells, pulling those further than ``reach`` cells back along their ray.

    ``reach`` is at least ``rows + cols``, so a pulled-back end still lies
    outside the grid and only the walk beyond the edge gets shorter.
    """
    origin = np.asarray(sensor, dtype=np.float64)
    delta = ends - origin
    span = np.abs(delta).max(axis=1)
    far = span > reach
    if far.any():
        delta[far] *= (reach / span[far])[:, None]
    return (origin + np.rint(delta)).astype(np.int64)


def geometric_ism(
    cloud: PointCloud,
    config: IsmConfig | None = None,
    spec: GridSpec | None = None,
) -> EvidentialGrid:
    """
    Sparse evidential grid from a single point cloud.

    Each ray deposits ``m(F) = free_mass_per_ray`` into the cells it crosses
    and each obstacle point deposits ``m(O_s) = occupied_mass_per_hit`` into
    its cell; all deposits are combined with Dempster's rule. The model never
    produces dynamic evidence.

    Parameters
    ----------
    cloud : PointCloud
        Ego-frame points.
    config : IsmConfig, optional
        Ground band and mass parameters.
    spec : GridSpec, optional
        Output raster; defaults to the standard geometry.

    Returns
    -------
    EvidentialGrid
        Grid holding only ``F``, ``O_s`` and ``Θ`` mass.
    """
    config = config or IsmConfig()
    spec = spec or GridSpec()
    free, occupied = ism_counts(cloud, config, spec)
    masses = combine_free_static_supports(
        free, config.free_mass_per_ray, occupied, config.occupied_mass_per_hit
    )
    logger.debug(
        f"ism: {int(np.count_nonzero(free))} free cells, "
        f"{int(np.count_nonzero(occupied))} occupied cells from {len(cloud)} points"
    )
    return EvidentialGrid(spec, masses)
