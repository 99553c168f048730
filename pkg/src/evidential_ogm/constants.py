"""Constants and enumerations for evidential_ogm."""

from __future__ import annotations

from enum import Enum, Flag, IntEnum

__all__ = [
    "DEFAULT_CELL_SIZE_M",
    "DEFAULT_GRID_LENGTH_M",
    "DEFAULT_GRID_WIDTH_M",
    "DEFAULT_MASK_LEVEL",
    "DEFAULT_MIN_BEAMS",
    "DEFAULT_MIN_POINTS",
    "DEFAULT_THRESHOLD",
    "EVALUATED_LABELS",
    "MASS_CHANNELS",
    "MASS_SUM_TOLERANCE",
    "TOTAL_CONFLICT_TOLERANCE",
    "CellLabel",
    "CellState",
    "CloudFrame",
    "Hypothesis",
    "Material",
]


class Hypothesis(Flag):
    """Members of the reduced power set over ``{F, O_s, O_d}``.

    Sets are bit masks, so set intersection is ``&`` and the empty set is
    ``Hypothesis(0)``.
    """

    F = 1
    O_S = 2
    O_D = 4

    # Composite hypotheses
    O_SD = O_S | O_D
    THETA = F | O_S | O_D


# Channel order of every mass array in the package.
MASS_CHANNELS: tuple[Hypothesis, ...] = (
    Hypothesis.F,
    Hypothesis.O_S,
    Hypothesis.O_D,
    Hypothesis.O_SD,
    Hypothesis.THETA,
)


class CellState(str, Enum):
    """Singleton cell states of the frame of discernment."""

    FREE = "F"
    STATIC = "O_s"
    DYNAMIC = "O_d"

    @property
    def hypothesis(self) -> Hypothesis:
        """Singleton hypothesis for this state."""
        return _STATE_HYPOTHESIS[self]


_STATE_HYPOTHESIS = {
    CellState.FREE: Hypothesis.F,
    CellState.STATIC: Hypothesis.O_S,
    CellState.DYNAMIC: Hypothesis.O_D,
}


class CellLabel(str, Enum):
    """Crisp label obtained by thresholding a cell's masses."""

    F = "F"
    O_S = "O_s"
    O_D = "O_d"
    O_SD = "O_sd"
    UNKNOWN = "unknown"

    @property
    def is_occupied(self) -> bool:
        """Whether the label is positive for the combined occupied state."""
        return self in (CellLabel.O_S, CellLabel.O_D, CellLabel.O_SD)


# States reported by the evaluation protocol, in report order.
EVALUATED_LABELS: tuple[CellLabel, ...] = (
    CellLabel.F,
    CellLabel.O_S,
    CellLabel.O_D,
    CellLabel.O_SD,
)


class Material(IntEnum):
    """Surface material reported by a simulated lidar reflection."""

    DRIVABLE = 0       # asphalt, road marks
    NON_DRIVABLE = 1   # sidewalk, building, pole, ...
    DYNAMIC_OBJECT = 2

    @property
    def intensity(self) -> float:
        """Constant return intensity emitted for this material."""
        return _MATERIAL_INTENSITY[self]


_MATERIAL_INTENSITY = {
    Material.DRIVABLE: 0.2,
    Material.NON_DRIVABLE: 0.5,
    Material.DYNAMIC_OBJECT: 0.8,
}

MASS_SUM_TOLERANCE = 1e-9
TOTAL_CONFLICT_TOLERANCE = 1e-12

DEFAULT_GRID_LENGTH_M = 81.92
DEFAULT_GRID_WIDTH_M = 56.32
DEFAULT_CELL_SIZE_M = 0.32

DEFAULT_THRESHOLD = 0.5
DEFAULT_MASK_LEVEL = 0.5
DEFAULT_MIN_BEAMS = 20
DEFAULT_MIN_POINTS = 20


class CloudFrame(str, Enum):
    """Coordinate frame of a point cloud."""

    SENSOR = "sensor"
    EGO = "ego"
