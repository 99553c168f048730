"""Scene and sensor description for the lidar simulator.

A scene is a JSON document validated by :class:`Scene`. Materials are
written by name (``"drivable"``, ``"non_drivable"``, ``"dynamic_object"``);
angles are radians and lengths metres. See ``docs/formats.md``.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Annotated, Any

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    field_validator,
    model_validator,
)

from evidential_ogm.constants import Material
from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.labels.geometry import BevBox

if TYPE_CHECKING:
    from numpy.typing import NDArray

__all__ = [
    "Box",
    "DynamicBox",
    "GroundPatch",
    "LidarConfig",
    "MountPose",
    "Scene",
    "SceneVariation",
    "StaticBox",
    "example_scene_path",
]


def _parse_material(value: Any) -> Any:
    if isinstance(value, str) and not isinstance(value, Material):
        try:
            return Material[value.upper()]
        except KeyError:
            msg = f"unknown material {value!r}"
            raise ValueError(msg) from None
    return value


MaterialField = Annotated[
    Material,
    BeforeValidator(_parse_material),
    PlainSerializer(lambda m: m.name.lower(), return_type=str),
]


class _FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class MountPose(_FrozenModel):
    """Sensor pose in the ego frame."""

    x: float = 0.0
    y: float = 0.0
    z: float = 1.8
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    @property
    def position(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y, self.z])

    def rotation(self) -> NDArray[np.float64]:
        """Sensor-to-ego rotation ``Rz(yaw) Ry(pitch) Rx(roll)``."""
        cr, sr = math.cos(self.roll), math.sin(self.roll)
        cp, sp = math.cos(self.pitch), math.sin(self.pitch)
        cy, sy = math.cos(self.yaw), math.sin(self.yaw)
        rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
        ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        return rz @ ry @ rx


class LidarConfig(_FrozenModel):
    """
    Rotating lidar with uniformly spaced layers and azimuths.

    Layer elevations are ``linspace(*vertical_fov, layers)``; a single layer
    looks at the middle of the field of view. Azimuth ``k`` is
    ``2πk / azimuth_steps`` in the sensor frame.
    """

    layers: int = Field(default=32, ge=1)
    azimuth_steps: int = Field(default=900, ge=1)
    vertical_fov: tuple[float, float] = (math.radians(-25.0), math.radians(15.0))
    mount_pose: MountPose = MountPose()
    max_range: float = Field(default=100.0, gt=0)
    dropout_probability: float = Field(
        default=0.0, ge=0.0, lt=1.0, description="Chance a return is lost"
    )
    range_noise_std_m: float = Field(
        default=0.0, ge=0.0, description="Gaussian range jitter"
    )

    @model_validator(mode="after")
    def _check_fov(self) -> LidarConfig:
        low, high = self.vertical_fov
        if not (-math.pi / 2 <= low <= high <= math.pi / 2):
            msg = f"vertical_fov must be ordered within [-pi/2, pi/2], got {self.vertical_fov}"
            raise ValueError(msg)
        return self

    @classmethod
    def dense_from(cls, sparse: LidarConfig, layers: int = 3000) -> LidarConfig:
        """Noise-free label sensor sharing pose and field of view with ``sparse``."""
        return sparse.model_copy(
            update={"layers": layers, "dropout_probability": 0.0, "range_noise_std_m": 0.0}
        )

    @property
    def ray_count(self) -> int:
        return self.layers * self.azimuth_steps

    @property
    def has_noise(self) -> bool:
        return self.dropout_probability > 0.0 or self.range_noise_std_m > 0.0

    @property
    def blind_radius_m(self) -> float:
        """
        Ground range around the mount that no beam reaches.

        Computed for a level mount over the plane ``z = 0``: the lowest layer
        meets the ground at ``mount_z / tan(-elevation)``. Cells inside this
        disc receive no returns and stay vacuous in a label.
        """
        if self.mount_pose.z <= 0.0:
            return 0.0
        lowest = float(self.elevations().min())
        if lowest >= 0.0:
            return math.inf
        return self.mount_pose.z / math.tan(-lowest)

    def elevations(self) -> NDArray[np.float64]:
        low, high = self.vertical_fov
        if self.layers == 1:
            return np.array([(low + high) / 2.0])
        return np.linspace(low, high, self.layers)

    def azimuths(self) -> NDArray[np.float64]:
        return 2.0 * np.pi * np.arange(self.azimuth_steps) / self.azimuth_steps

    def ray_directions(
        self, start: int = 0, stop: int | None = None
    ) -> NDArray[np.float64]:
        """Unit directions in the ego frame for rays ``start:stop``.

        Ray ``layer * azimuth_steps + k`` is layer ``layer``, azimuth ``k``.
        """
        stop = self.ray_count if stop is None else stop
        index = np.arange(start, stop)
        layer, step = np.divmod(index, self.azimuth_steps)
        elevation = self.elevations()[layer]
        azimuth = self.azimuths()[step]
        local = np.stack(
            [
                np.cos(elevation) * np.cos(azimuth),
                np.cos(elevation) * np.sin(azimuth),
                np.sin(elevation),
            ],
            axis=-1,
        )
        return local @ self.mount_pose.rotation().T

    def shares_geometry(self, other: LidarConfig) -> bool:
        """Whether both sensors have the same pose and vertical field of view."""
        return (
            self.mount_pose == other.mount_pose
            and self.vertical_fov == other.vertical_fov
        )


class GroundPatch(_FrozenModel):
    """Planar polygon ``z = z0 + slope_x x + slope_y y`` over its BEV outline."""

    vertices: list[tuple[float, float]] = Field(min_length=3)
    material: MaterialField = Material.DRIVABLE
    z0: float = 0.0
    slope_x: float = 0.0
    slope_y: float = 0.0

    @field_validator("material")
    @classmethod
    def _not_dynamic(cls, value: Material) -> Material:
        if value is Material.DYNAMIC_OBJECT:
            msg = "ground patches cannot be dynamic objects"
            raise ValueError(msg)
        return value

    def height(self, x: float, y: float) -> float:
        return self.z0 + self.slope_x * x + self.slope_y * y


class Box(_FrozenModel):
    """Oriented 3D box; ``center`` is the volume centre, ``size`` is (length, width, height)."""

    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float = 0.0
    material: MaterialField = Material.NON_DRIVABLE

    @field_validator("size")
    @classmethod
    def _positive_size(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        if min(value) <= 0.0:
            msg = f"box extents must be positive, got {value}"
            raise ValueError(msg)
        return value

    def bev(self, object_id: int | None = None) -> BevBox:
        return BevBox(
            center_x=self.center[0],
            center_y=self.center[1],
            length_m=self.size[0],
            width_m=self.size[1],
            yaw=self.yaw,
            object_id=object_id,
        )


class StaticBox(Box):
    """Box of a static obstacle such as a pole, bench or building."""

    @field_validator("material")
    @classmethod
    def _not_dynamic(cls, value: Material) -> Material:
        if value is Material.DYNAMIC_OBJECT:
            msg = "static boxes cannot be dynamic objects"
            raise ValueError(msg)
        return value


class DynamicBox(Box):
    """Box of a dynamic object; ``object_id`` must be unique in the scene."""

    object_id: int = Field(ge=0)
    material: MaterialField = Material.DYNAMIC_OBJECT

    @field_validator("material")
    @classmethod
    def _is_dynamic(cls, value: Material) -> Material:
        if value is not Material.DYNAMIC_OBJECT:
            msg = "dynamic boxes must use the dynamic_object material"
            raise ValueError(msg)
        return value

    def bev(self, object_id: int | None = None) -> BevBox:
        return super().bev(self.object_id if object_id is None else object_id)


class SceneVariation(_FrozenModel):
    """Per-sample jitter applied to dynamic boxes."""

    dynamic_translation_std_m: float = Field(default=0.0, ge=0.0)
    dynamic_yaw_std_rad: float = Field(default=0.0, ge=0.0)

    @property
    def is_static(self) -> bool:
        return self.dynamic_translation_std_m == 0.0 and self.dynamic_yaw_std_rad == 0.0


def _default_dense() -> LidarConfig:
    return LidarConfig.dense_from(LidarConfig())


class Scene(_FrozenModel):
    """Ground patches, static and dynamic boxes plus the two sensors."""

    patches: list[GroundPatch] = Field(default_factory=list)
    static_boxes: list[StaticBox] = Field(default_factory=list)
    dynamic_boxes: list[DynamicBox] = Field(default_factory=list)
    sparse_sensor: LidarConfig = Field(default_factory=LidarConfig)
    dense_sensor: LidarConfig = Field(default_factory=_default_dense)
    grid: GridSpec = Field(default_factory=GridSpec)
    variation: SceneVariation = Field(default_factory=SceneVariation)

    @model_validator(mode="after")
    def _unique_object_ids(self) -> Scene:
        ids = [box.object_id for box in self.dynamic_boxes]
        if len(ids) != len(set(ids)):
            msg = f"dynamic object ids must be unique, got {ids}"
            raise ValueError(msg)
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> Scene:
        return cls.model_validate_json(Path(path).read_text())

    def without_dynamic_boxes(self) -> Scene:
        return self.model_copy(update={"dynamic_boxes": []})

    def jittered(self, rng: np.random.Generator) -> Scene:
        """Copy with dynamic boxes displaced according to :attr:`variation`."""
        if self.variation.is_static or not self.dynamic_boxes:
            return self
        n = len(self.dynamic_boxes)
        shift = rng.normal(0.0, self.variation.dynamic_translation_std_m, size=(n, 2))
        turn = rng.normal(0.0, self.variation.dynamic_yaw_std_rad, size=n)
        boxes = [
            box.model_copy(
                update={
                    "center": (
                        box.center[0] + float(dx),
                        box.center[1] + float(dy),
                        box.center[2],
                    ),
                    "yaw": box.yaw + float(dyaw),
                }
            )
            for box, (dx, dy), dyaw in zip(self.dynamic_boxes, shift, turn, strict=True)
        ]
        return self.model_copy(update={"dynamic_boxes": boxes})


def example_scene_path() -> Path:
    """Path of the street scene shipped with the package."""
    return Path(str(resources.files("evidential_ogm") / "data" / "scenes" / "street.json"))
