"""Bird's-eye-view raster geometry, evidential grids and cell traversal."""

from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.grid.traversal import (
    RayTraversal,
    border_traversal,
    supercover,
    supercover_batch,
)

__all__ = [
    "EvidentialGrid",
    "GridSpec",
    "RayTraversal",
    "border_traversal",
    "supercover",
    "supercover_batch",
]
