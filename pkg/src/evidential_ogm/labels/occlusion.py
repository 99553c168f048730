"""Observability masking by 2D ray casting from the sensor to the grid border."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from evidential_ogm.constants import CellLabel
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import LABEL_CODES, classify_masses, vacuous_masses
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.traversal import border_traversal

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.spec import GridSpec

__all__ = ["blocking_cells", "occlusion_mask", "occluded_cells"]

_BLOCKING_CODES = (LABEL_CODES.index(CellLabel.O_S), LABEL_CODES.index(CellLabel.O_D))


def blocking_cells(grid: EvidentialGrid, threshold: float = 0.5) -> NDArray[np.bool_]:
    """Cells whose label is ``O_s`` or ``O_d``; these stop rays."""
    codes = classify_masses(grid.masses, threshold)
    return np.isin(codes, _BLOCKING_CODES)


def occluded_cells(
    blockers: NDArray[np.bool_], sensor: tuple[int, int]
) -> NDArray[np.bool_]:
    """
    Cells that no unblocked ray from ``sensor`` reaches.

    Rays run from the sensor cell to every border cell. On a ray, a blocker
    hides every cell of strictly larger rank; the blocker itself stays
    visible. The sensor cell never blocks. A cell is occluded when it lies on
    at least one ray and every ray through it is blocked before it. Cells on
    no ray are not occluded.
    """
    rows, cols = blockers.shape
    blockers = np.array(blockers, dtype=bool)
    blockers[sensor] = False
    rays = border_traversal(rows, cols, (int(sensor[0]), int(sensor[1])))
    never = np.iinfo(np.int64).max
    blocker_rank = np.where(blockers[rays.rows, rays.cols], rays.ranks, never)
    first_blocker = np.full(rays.ray_count, never, dtype=np.int64)
    np.minimum.at(first_blocker, rays.ray, blocker_rank)
    visible = rays.ranks <= first_blocker[rays.ray]

    touched = np.zeros((rows, cols), dtype=bool)
    seen = np.zeros((rows, cols), dtype=bool)
    touched[rays.rows, rays.cols] = True
    seen[rays.rows[visible], rays.cols[visible]] = True
    return touched & ~seen


def occlusion_mask(
    grid: EvidentialGrid,
    sensor_origin: tuple[float, float],
    spec: GridSpec,
    protected: NDArray[np.bool_] | None = None,
) -> EvidentialGrid:
    """
    Replace cells hidden behind obstacles with ``m(Θ) = 1``.

    Parameters
    ----------
    grid : EvidentialGrid
        Label grid before masking; ``O_s`` and ``O_d`` cells block rays.
    sensor_origin : tuple[float, float]
        Sensor position ``(x, y)`` in the ego frame.
    spec : GridSpec
        Geometry of ``grid``.
    protected : ndarray of bool, optional
        ``(rows, cols)`` cells that keep their masses even when occluded.

    Returns
    -------
    EvidentialGrid
        Masked grid.

    Raises
    ------
    DomainError
        If the sensor lies outside the grid or the geometry does not match.
    """
    spec.require_compatible(grid.spec, "grid and spec")
    sensor = spec.world_to_cell(*sensor_origin)
    if sensor is None:
        msg = f"sensor origin {sensor_origin} lies outside the grid"
        raise DomainError(msg)
    occluded = occluded_cells(blocking_cells(grid), sensor)
    if protected is not None:
        protected = np.asarray(protected, dtype=bool)
        if protected.shape != spec.shape:
            msg = f"protected mask has shape {protected.shape}, expected {spec.shape}"
            raise DomainError(msg)
        occluded &= ~protected
    count = int(np.count_nonzero(occluded))
    if not count:
        return grid
    logger.debug(f"occlusion masked {count} cells")
    masses = grid.masses.copy()
    masses[occluded] = vacuous_masses((count,))
    return EvidentialGrid(spec, masses, grid.conflicts)
