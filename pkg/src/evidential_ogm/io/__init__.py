"""Binary file formats, PNG rendering and the handler registry."""

from __future__ import annotations

from functools import cache

from evidential_ogm.io.base import FileIOBase, IORegistry, atomic_write_bytes
from evidential_ogm.io.cloud import CloudFileIO, read_cloud, write_cloud
from evidential_ogm.io.ogm import OgmFileIO, read_ogm, write_ogm
from evidential_ogm.io.pillars import (
    PillarFileIO,
    PillarTensor,
    pillarize,
    read_pillars,
    write_pillars,
)
from evidential_ogm.io.render import grid_to_rgb, render_png
from evidential_ogm.io.sample import load_annotated_sample, write_annotated_sample

__all__ = [
    "CloudFileIO",
    "FileIOBase",
    "IORegistry",
    "OgmFileIO",
    "PillarFileIO",
    "PillarTensor",
    "atomic_write_bytes",
    "get_registry",
    "grid_to_rgb",
    "load_annotated_sample",
    "pillarize",
    "read_cloud",
    "read_ogm",
    "read_pillars",
    "render_png",
    "write_annotated_sample",
    "write_cloud",
    "write_ogm",
    "write_pillars",
]


@cache
def get_registry() -> IORegistry:
    """Registry with every binary format of this package."""
    registry = IORegistry()
    for handler in (OgmFileIO(), CloudFileIO(), PillarFileIO()):
        registry.register(handler)
    return registry
