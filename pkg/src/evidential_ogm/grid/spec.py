"""Grid geometry and world <-> cell transforms."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from evidential_ogm.constants import (
    DEFAULT_CELL_SIZE_M,
    DEFAULT_GRID_LENGTH_M,
    DEFAULT_GRID_WIDTH_M,
)
from evidential_ogm.errors import DomainError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

__all__ = ["GridSpec"]

# Decimals kept when turning a coordinate into a fractional cell index.
_INDEX_DECIMALS = 9
_INTEGRALITY_TOLERANCE = 1e-6


class GridSpec(BaseModel):
    """
    Bird's-eye-view raster geometry.

    Rows run along the forward ``x`` axis and columns along the lateral ``y``
    axis (vehicle left), both increasing with the coordinate. The grid centre
    sits at ``(center_x_m, center_y_m)`` in the ego frame; the default is the
    ego origin. Cells are half-open, ``[low, high)``, on both axes.

    Examples
    --------
    >>> spec = GridSpec()
    >>> spec.rows, spec.cols
    (256, 176)
    >>> spec.world_to_cell(0.0, 0.0)
    (128, 88)
    >>> spec.world_to_cell(40.96, 0.0) is None
    True
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    length_m: float = Field(default=DEFAULT_GRID_LENGTH_M, gt=0, description="Forward extent")
    width_m: float = Field(default=DEFAULT_GRID_WIDTH_M, gt=0, description="Lateral extent")
    cell_size_m: float = Field(default=DEFAULT_CELL_SIZE_M, gt=0, description="Cell edge")
    center_x_m: float = Field(default=0.0, description="Grid centre, ego x")
    center_y_m: float = Field(default=0.0, description="Grid centre, ego y")

    @model_validator(mode="after")
    def _check_integral_extent(self) -> GridSpec:
        for name, extent in (("length_m", self.length_m), ("width_m", self.width_m)):
            ratio = extent / self.cell_size_m
            if abs(ratio - round(ratio)) > _INTEGRALITY_TOLERANCE or round(ratio) < 1:
                msg = (
                    f"{name}={extent} is not a positive integer multiple of "
                    f"cell_size_m={self.cell_size_m}"
                )
                raise ValueError(msg)
        return self

    @property
    def rows(self) -> int:
        return round(self.length_m / self.cell_size_m)

    @property
    def cols(self) -> int:
        return round(self.width_m / self.cell_size_m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def x_min(self) -> float:
        """Lower forward edge of the grid."""
        return self.center_x_m - self.length_m / 2.0

    @property
    def y_min(self) -> float:
        """Lower lateral edge of the grid."""
        return self.center_y_m - self.width_m / 2.0

    @property
    def is_ego_centered(self) -> bool:
        return self.center_x_m == 0.0 and self.center_y_m == 0.0

    def world_to_cell(self, x: float, y: float) -> tuple[int, int] | None:
        """Index of the cell containing ``(x, y)``, or None outside the extent."""
        row = math.floor(round((x - self.x_min) / self.cell_size_m, _INDEX_DECIMALS))
        col = math.floor(round((y - self.y_min) / self.cell_size_m, _INDEX_DECIMALS))
        if 0 <= row < self.rows and 0 <= col < self.cols:
            return row, col
        return None

    def cell_indices(
        self, x: ArrayLike, y: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        Floor row and column indices without bounds checks.

        Indices of points beyond the extent fall outside ``[0, rows)`` or
        ``[0, cols)``; non-finite coordinates give non-finite indices.
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        rows = np.floor(np.round((x - self.x_min) / self.cell_size_m, _INDEX_DECIMALS))
        cols = np.floor(np.round((y - self.y_min) / self.cell_size_m, _INDEX_DECIMALS))
        return rows, cols

    def points_to_cells(
        self, x: ArrayLike, y: ArrayLike
    ) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.bool_]]:
        """
        Vectorised :meth:`world_to_cell`.

        Returns
        -------
        rows, cols : ndarray of int64
            Cell indices; meaningless where ``valid`` is False.
        valid : ndarray of bool
            Whether the point lies inside the extent.
        """
        rows, cols = self.cell_indices(x, y)
        valid = (
            np.isfinite(rows)
            & np.isfinite(cols)
            & (rows >= 0)
            & (rows < self.rows)
            & (cols >= 0)
            & (cols < self.cols)
        )
        rows = np.where(valid, rows, 0).astype(np.int64)
        cols = np.where(valid, cols, 0).astype(np.int64)
        return rows, cols, valid

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        """World coordinates of a cell centre."""
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            msg = f"cell ({row}, {col}) outside {self.rows}x{self.cols} grid"
            raise DomainError(msg)
        return (
            self.x_min + (row + 0.5) * self.cell_size_m,
            self.y_min + (col + 0.5) * self.cell_size_m,
        )

    def cell_centers(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Centre ``x`` per row and centre ``y`` per column."""
        xs = self.x_min + (np.arange(self.rows) + 0.5) * self.cell_size_m
        ys = self.y_min + (np.arange(self.cols) + 0.5) * self.cell_size_m
        return xs, ys

    def require_compatible(self, other: GridSpec, what: str = "grids") -> None:
        """Raise :class:`DomainError` unless ``other`` describes the same raster."""
        if self != other:
            msg = f"{what} disagree on geometry: {self!r} vs {other!r}"
            raise DomainError(msg)
