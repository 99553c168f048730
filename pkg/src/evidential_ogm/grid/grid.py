"""Evidential raster of belief masses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from evidential_ogm.constants import MASS_CHANNELS, MASS_SUM_TOLERANCE, CellLabel
from evidential_ogm.errors import ConflictError, DomainError
from evidential_ogm.evidence.mass import (
    LABEL_CODES,
    BeliefMass,
    classify_masses,
    combine_dempster,
    combine_dempster_arrays,
    vacuous_masses,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.spec import GridSpec

__all__ = ["EvidentialGrid"]


@dataclass(frozen=True, slots=True, eq=False)
class EvidentialGrid:
    """
    Belief masses over a :class:`~evidential_ogm.grid.spec.GridSpec`.

    Parameters
    ----------
    spec : GridSpec
        Raster geometry.
    masses : ndarray
        ``(rows, cols, 5)`` float64 masses in channel order. The grid keeps a
        read-only copy.
    conflicts : int
        Number of deposits dropped because of total conflict.
    """

    spec: GridSpec
    masses: NDArray[np.float64]
    conflicts: int = 0

    def __post_init__(self) -> None:
        masses = np.array(self.masses, dtype=np.float64)
        expected = (*self.spec.shape, len(MASS_CHANNELS))
        if masses.shape != expected:
            msg = f"mass array has shape {masses.shape}, expected {expected}"
            raise DomainError(msg)
        if not np.all(
            (masses >= -MASS_SUM_TOLERANCE) & (masses <= 1.0 + MASS_SUM_TOLERANCE)
        ):
            msg = "every mass must lie in [0, 1]"
            raise DomainError(msg)
        if not np.all(np.abs(masses.sum(axis=-1) - 1.0) <= MASS_SUM_TOLERANCE):
            msg = "masses of every cell must sum to 1"
            raise DomainError(msg)
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def vacuous(cls, spec: GridSpec) -> EvidentialGrid:
        """Fresh grid, every cell ``m(Θ) = 1``."""
        return cls(spec, vacuous_masses(spec.shape))

    @property
    def shape(self) -> tuple[int, int]:
        return self.spec.shape

    def _check_index(self, row: int, col: int) -> None:
        rows, cols = self.shape
        if not (0 <= row < rows and 0 <= col < cols):
            msg = f"cell ({row}, {col}) outside {rows}x{cols} grid"
            raise DomainError(msg)

    def cell(self, row: int, col: int) -> BeliefMass:
        self._check_index(row, col)
        return BeliefMass.from_array(self.masses[row, col])

    def deposit(self, row: int, col: int, m: BeliefMass) -> EvidentialGrid:
        """
        Combine ``m`` into one cell with Dempster's rule.

        Returns a new grid; ``self`` is unchanged. A deposit in total conflict
        with the cell is dropped and counted in :attr:`conflicts`.

        Examples
        --------
        >>> from evidential_ogm.constants import Hypothesis
        >>> from evidential_ogm.grid.spec import GridSpec
        >>> free = BeliefMass.from_mapping({Hypothesis.F: 0.1})
        >>> grid = EvidentialGrid.vacuous(GridSpec())
        >>> grid = grid.deposit(0, 0, free).deposit(0, 0, free)
        >>> round(grid.cell(0, 0)[Hypothesis.F], 12)
        0.19
        """
        self._check_index(row, col)
        try:
            combined = combine_dempster(self.cell(row, col), m)
        except ConflictError as error:
            logger.warning(f"dropped deposit at cell ({row}, {col}): {error}")
            return EvidentialGrid(self.spec, self.masses, self.conflicts + 1)
        masses = self.masses.copy()
        masses[row, col] = combined.values
        return EvidentialGrid(self.spec, masses, self.conflicts)

    def combine(self, masses: NDArray[np.float64]) -> EvidentialGrid:
        """Cell-wise Dempster combination with another ``(rows, cols, 5)`` array."""
        combined, conflicted = combine_dempster_arrays(self.masses, masses)
        dropped = int(np.count_nonzero(conflicted))
        if dropped:
            logger.warning(f"dropped {dropped} deposits in total conflict")
        return EvidentialGrid(self.spec, combined, self.conflicts + dropped)

    def label_codes(self, threshold: float) -> NDArray[np.int8]:
        """Per-cell indices into :data:`~evidential_ogm.evidence.mass.LABEL_CODES`."""
        return classify_masses(self.masses, threshold)

    def labels(self, threshold: float) -> NDArray[np.object_]:
        """Per-cell :class:`~evidential_ogm.constants.CellLabel` values."""
        return np.asarray(LABEL_CODES, dtype=object)[self.label_codes(threshold)]

    def count_label(self, label: CellLabel, threshold: float) -> int:
        return int(np.count_nonzero(self.label_codes(threshold) == LABEL_CODES.index(label)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EvidentialGrid):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.conflicts == other.conflicts
            and np.array_equal(self.masses, other.masses)
        )

    __hash__ = None  # type: ignore[assignment]
