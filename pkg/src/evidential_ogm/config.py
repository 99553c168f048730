"""Pipeline configuration models.

All models are frozen pydantic models that reject unknown keys, so a typo in
a JSON document fails at load time instead of being ignored.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from evidential_ogm.constants import (
    DEFAULT_MASK_LEVEL,
    DEFAULT_MIN_BEAMS,
    DEFAULT_MIN_POINTS,
    DEFAULT_THRESHOLD,
)

__all__ = [
    "AnnotationLabelConfig",
    "CoverageMode",
    "EvaluationConfig",
    "IsmConfig",
    "SyntheticLabelConfig",
]

CoverageMode = Literal["center", "overlap"]


class _FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SyntheticLabelConfig(_FrozenModel):
    """Label generation from a dense simulated sensor."""

    mass_per_hit: float = Field(
        default=0.1,
        ge=0.0,
        lt=1.0,
        description="m(F) or m(O_s) contributed by one reflection",
    )
    neighborhood_radius: int = Field(
        default=1,
        ge=0,
        description="Chebyshev radius of cells receiving each contribution (0 = hit cell only)",
    )
    min_beams: int = Field(
        default=DEFAULT_MIN_BEAMS,
        ge=0,
        description="Hits an object needs before it is labelled dynamic",
    )
    count_sparse_hits: bool = Field(
        default=False,
        description="Count object hits on the sparse sensor instead of the dense one",
    )


class AnnotationLabelConfig(_FrozenModel):
    """Label generation from annotated samples."""

    min_points: int = Field(
        default=DEFAULT_MIN_POINTS,
        ge=0,
        description="Points a box must contain to be labelled dynamic",
    )
    coverage: CoverageMode = Field(
        default="center",
        description="'center': cell centre inside the footprint; 'overlap': any overlap",
    )


class IsmConfig(_FrozenModel):
    """Geometric inverse sensor model parameters."""

    ground_height_band: tuple[float, float] = Field(
        default=(-0.3, 0.3),
        description="(z_min, z_max) of ground returns relative to the ego ground plane",
    )
    free_mass_per_ray: float = Field(default=0.05, gt=0.0, lt=1.0)
    occupied_mass_per_hit: float = Field(default=0.3, gt=0.0, lt=1.0)
    sensor_xy: tuple[float, float] = Field(
        default=(0.0, 0.0),
        description="Sensor position in the ego frame the rays start from",
    )

    @model_validator(mode="after")
    def _check_band(self) -> IsmConfig:
        z_min, z_max = self.ground_height_band
        if not z_min < z_max:
            msg = f"ground band needs z_min < z_max, got {self.ground_height_band}"
            raise ValueError(msg)
        return self


class EvaluationConfig(_FrozenModel):
    """Threshold classification and known-state masking."""

    threshold: float = Field(default=DEFAULT_THRESHOLD, gt=0.0, le=1.0)
    mask_level: float = Field(default=DEFAULT_MASK_LEVEL, gt=0.0, le=1.0)
    averaging: Literal["micro", "macro"] = "micro"
