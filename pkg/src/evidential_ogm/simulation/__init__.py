"""Deterministic lidar simulation and synthetic label generation."""

from evidential_ogm.simulation.raycast import RayHit, RayHits, cast_rays
from evidential_ogm.simulation.scene import (
    Box,
    DynamicBox,
    GroundPatch,
    LidarConfig,
    MountPose,
    Scene,
    SceneVariation,
    StaticBox,
    example_scene_path,
)
from evidential_ogm.simulation.synthetic import (
    apply_dynamic_masses,
    generate_synthetic_sample,
    hits_to_grid,
)

__all__ = [
    "Box",
    "DynamicBox",
    "GroundPatch",
    "LidarConfig",
    "MountPose",
    "RayHit",
    "RayHits",
    "Scene",
    "SceneVariation",
    "StaticBox",
    "apply_dynamic_masses",
    "cast_rays",
    "example_scene_path",
    "generate_synthetic_sample",
    "hits_to_grid",
]
