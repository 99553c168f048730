"""
Annotated-sample sidecar documents.

An annotated sample on disk is an EPCL cloud plus a JSON sidecar::

    {
      "version": 1,
      "cloud": "scene_0001.epcl",
      "grid": {"length_m": 81.92, "width_m": 56.32, "cell_size_m": 0.32, ...},
      "sensor_origin": [0.0, 0.0],
      "boxes": [{"center_x": 10.0, "center_y": 2.0, "length_m": 4.5, ...}],
      "drivable": {"rows": 256, "cols": 176, "bits": "<base64>"}
    }

``cloud`` is resolved relative to the sidecar. ``bits`` is the row-major
drivable raster packed with :func:`numpy.packbits` (big-endian bit order).
"""

from __future__ import annotations

import base64
import binascii
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from evidential_ogm.grid.spec import GridSpec
from evidential_ogm.io.base import atomic_write_bytes
from evidential_ogm.io.cloud import read_cloud, write_cloud
from evidential_ogm.labels.annotations import AnnotatedSample
from evidential_ogm.labels.geometry import BevBox

__all__ = [
    "DrivableRaster",
    "SampleDocument",
    "load_annotated_sample",
    "write_annotated_sample",
]

SAMPLE_VERSION = 1


class DrivableRaster(BaseModel):
    """Packed boolean raster."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    bits: str

    @model_validator(mode="after")
    def _check_bits(self) -> DrivableRaster:
        try:
            packed = base64.b64decode(self.bits, validate=True)
        except binascii.Error as error:
            msg = f"drivable bits are not valid base64: {error}"
            raise ValueError(msg) from error
        expected = -(-self.rows * self.cols // 8)
        if len(packed) != expected:
            msg = (
                f"drivable bits hold {len(packed)} bytes, "
                f"{self.rows}x{self.cols} needs {expected}"
            )
            raise ValueError(msg)
        return self

    @classmethod
    def from_array(cls, drivable: np.ndarray) -> DrivableRaster:
        rows, cols = drivable.shape
        packed = np.packbits(np.asarray(drivable, dtype=bool).ravel())
        return cls(rows=rows, cols=cols, bits=base64.b64encode(packed.tobytes()).decode("ascii"))

    def to_array(self) -> np.ndarray:
        packed = np.frombuffer(base64.b64decode(self.bits), dtype=np.uint8)
        bits = np.unpackbits(packed, count=self.rows * self.cols)
        return bits.astype(bool).reshape(self.rows, self.cols)


class SampleDocument(BaseModel):
    """JSON sidecar of an annotated sample."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    version: Literal[1] = SAMPLE_VERSION
    cloud: str = Field(description="EPCL file, relative to the sidecar")
    grid: GridSpec = Field(default_factory=GridSpec)
    sensor_origin: tuple[float, float] = (0.0, 0.0)
    boxes: list[BevBox] = Field(default_factory=list)
    drivable: DrivableRaster

    @model_validator(mode="after")
    def _check_raster(self) -> SampleDocument:
        if (self.drivable.rows, self.drivable.cols) != self.grid.shape:
            msg = (
                f"drivable raster is {self.drivable.rows}x{self.drivable.cols}, "
                f"grid is {self.grid.rows}x{self.grid.cols}"
            )
            raise ValueError(msg)
        return self


def write_annotated_sample(
    sample: AnnotatedSample,
    spec: GridSpec,
    path: str | Path,
) -> Path:
    """
    Write ``sample`` as ``<path>`` plus a cloud file ``<stem>.epcl`` beside it.

    The grid geometry ``spec`` is recorded in the sidecar.
    """
    path = Path(path)
    cloud_path = path.with_suffix(".epcl")
    write_cloud(cloud_path, sample.cloud)
    document = SampleDocument(
        cloud=cloud_path.name,
        grid=spec,
        sensor_origin=sample.sensor_origin,
        boxes=list(sample.boxes),
        drivable=DrivableRaster.from_array(sample.drivable_map),
    )
    return atomic_write_bytes(path, (document.model_dump_json(indent=2) + "\n").encode())


def load_annotated_sample(path: str | Path) -> tuple[AnnotatedSample, GridSpec]:
    """
    Read a sidecar and the cloud it references.

    Raises
    ------
    pydantic.ValidationError
        If the sidecar does not match :class:`SampleDocument`.
    OSError, FormatError
        If the cloud file is missing or malformed.
    """
    path = Path(path)
    document = SampleDocument.model_validate_json(path.read_bytes())
    cloud = read_cloud(path.parent / document.cloud)
    sample = AnnotatedSample(
        cloud=cloud,
        boxes=tuple(document.boxes),
        drivable_map=document.drivable.to_array(),
        sensor_origin=document.sensor_origin,
        name=path.stem,
    )
    return sample, document.grid
