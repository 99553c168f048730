"""Synthetic training samples: sparse measurement cloud plus dense evidential label."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from evidential_ogm.config import SyntheticLabelConfig
from evidential_ogm.constants import Hypothesis, Material
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import CHANNEL_INDEX, combine_free_static_supports
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.labels.geometry import footprint_mask
from evidential_ogm.simulation.raycast import RayHits, cast_rays

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.spec import GridSpec
    from evidential_ogm.pointcloud import PointCloud
    from evidential_ogm.simulation.scene import LidarConfig, Scene

__all__ = ["apply_dynamic_masses", "count_hits", "generate_synthetic_sample", "hits_to_grid"]

_F = CHANNEL_INDEX[Hypothesis.F]
_OS = CHANNEL_INDEX[Hypothesis.O_S]
_OD = CHANNEL_INDEX[Hypothesis.O_D]
_OSD = CHANNEL_INDEX[Hypothesis.O_SD]
_THETA = CHANNEL_INDEX[Hypothesis.THETA]


def count_hits(
    hits: RayHits, spec: GridSpec, neighborhood_radius: int
) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """
    Per-cell counts of free and static contributions.

    Each hit contributes once to its own cell and once to every cell within
    ``neighborhood_radius`` (Chebyshev distance). Drivable reflections count
    as free, every other reflection as static.

    Returns
    -------
    free, static : ndarray of int64
        ``(rows, cols)`` contribution counts.
    """
    rows, cols = spec.shape
    r, c, valid = spec.points_to_cells(hits.points[:, 0], hits.points[:, 1])
    drivable = hits.material == Material.DRIVABLE
    free = np.zeros(rows * cols, dtype=np.int64)
    static = np.zeros(rows * cols, dtype=np.int64)
    span = range(-neighborhood_radius, neighborhood_radius + 1)
    for dr in span:
        for dc in span:
            rr = r + dr
            cc = c + dc
            inside = valid & (rr >= 0) & (rr < rows) & (cc >= 0) & (cc < cols)
            flat = rr * cols + cc
            free += np.bincount(flat[inside & drivable], minlength=rows * cols)
            static += np.bincount(flat[inside & ~drivable], minlength=rows * cols)
    return free.reshape(rows, cols), static.reshape(rows, cols)


def hits_to_grid(
    hits: RayHits,
    spec: GridSpec,
    config: SyntheticLabelConfig | None = None,
) -> EvidentialGrid:
    """
    Evidential grid from per-reflection mass contributions.

    Every drivable reflection deposits ``m(F) = config.mass_per_hit`` and
    every other reflection ``m(O_s) = config.mass_per_hit`` into its cell
    neighbourhood; all deposits of a cell are combined with Dempster's rule.
    """
    config = config or SyntheticLabelConfig()
    free, static = count_hits(hits, spec, config.neighborhood_radius)
    masses = combine_free_static_supports(
        free, config.mass_per_hit, static, config.mass_per_hit
    )
    return EvidentialGrid(spec, masses)


def apply_dynamic_masses(
    grid: EvidentialGrid,
    scene: Scene,
    hits: RayHits,
    spec: GridSpec,
    min_beams: int,
) -> EvidentialGrid:
    """
    Turn static evidence under observed dynamic objects into dynamic evidence.

    For every dynamic box hit by at least ``min_beams`` rays, the footprint
    cells ``C`` are rewritten with ``m(O_d) = mean_C m(O_s)``, ``m(O_s) = 0``
    and ``m({O_s,O_d}) = 0``. ``m(F)`` is kept unless ``m(F) + m(O_d) > 1``,
    in which case it becomes ``1 - m(O_d)``; ``m(Θ)`` takes the rest.

    All averages are read from the input grid before any cell changes;
    overlapping footprints are written in scene order.
    """
    if min_beams < 0:
        msg = f"min_beams must be >= 0, got {min_beams}"
        raise DomainError(msg)
    spec.require_compatible(grid.spec, "label grid and spec")
    source = grid.masses
    rewrites: list[tuple[NDArray[np.bool_], float]] = []
    for box in scene.dynamic_boxes:
        beams = hits.hit_count(box.object_id)
        if beams < min_beams:
            logger.debug(f"object {box.object_id}: {beams} beams < {min_beams}, skipped")
            continue
        footprint = footprint_mask(spec, box.bev())
        if not footprint.any():
            logger.debug(f"object {box.object_id}: footprint covers no cell")
            continue
        rewrites.append((footprint, float(source[footprint, _OS].mean())))
    if not rewrites:
        return grid

    masses = source.copy()
    for footprint, dynamic in rewrites:
        free = np.minimum(masses[footprint, _F], 1.0 - dynamic)
        masses[footprint, _F] = free
        masses[footprint, _OS] = 0.0
        masses[footprint, _OD] = dynamic
        masses[footprint, _OSD] = 0.0
        masses[footprint, _THETA] = np.maximum(1.0 - free - dynamic, 0.0)
    return EvidentialGrid(spec, masses, grid.conflicts)


def generate_synthetic_sample(
    scene: Scene,
    sparse: LidarConfig,
    dense: LidarConfig,
    spec: GridSpec,
    config: SyntheticLabelConfig | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[PointCloud, EvidentialGrid]:
    """
    Simulate one training sample.

    Parameters
    ----------
    scene : Scene
        Geometry.
    sparse : LidarConfig
        Measurement sensor; its hits form the returned point cloud.
    dense : LidarConfig
        Label sensor with the same pose and vertical field of view.
    spec : GridSpec
        Label raster.
    config : SyntheticLabelConfig, optional
        Mass per reflection, neighbourhood and beam filter.
    rng : numpy.random.Generator, optional
        Noise source for the measurement sensor. The label sensor is always
        noise-free.

    Returns
    -------
    cloud : PointCloud
        Ego-frame measurement cloud.
    label : EvidentialGrid
        Evidential label grid.
    """
    if not sparse.shares_geometry(dense):
        msg = "sparse and dense sensors must share mount pose and vertical field of view"
        raise DomainError(msg)
    config = config or SyntheticLabelConfig()
    sparse_hits = cast_rays(scene, sparse, rng)
    dense_hits = cast_rays(scene, dense)
    label = hits_to_grid(dense_hits, spec, config)
    beam_hits = sparse_hits if config.count_sparse_hits else dense_hits
    label = apply_dynamic_masses(label, scene, beam_hits, spec, config.min_beams)
    logger.info(
        f"simulated sample: {len(sparse_hits)} measurement points, "
        f"{len(dense_hits)} label reflections"
    )
    return sparse_hits.to_point_cloud(), label
