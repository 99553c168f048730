"""PNG rendering of evidential grids."""

from __future__ import annotations

import io
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image

from evidential_ogm.constants import Hypothesis
from evidential_ogm.evidence.mass import CHANNEL_INDEX
from evidential_ogm.io.base import atomic_write_bytes

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.grid import EvidentialGrid

__all__ = ["grid_to_rgb", "render_png"]

# red, green, blue
_COLOR_CHANNELS = (
    CHANNEL_INDEX[Hypothesis.O_S],
    CHANNEL_INDEX[Hypothesis.F],
    CHANNEL_INDEX[Hypothesis.O_D],
)


def grid_to_rgb(grid: EvidentialGrid) -> NDArray[np.uint8]:
    """
    One RGB pixel per cell: red ``m(O_s)``, green ``m(F)``, blue ``m(O_d)``.

    Values are quantised as ``floor(255 m + 0.5)``. The image is oriented
    with forward (+x) at the top and vehicle left (+y) on the left, so row 0
    of the image is the last grid row.

    Examples
    --------
    >>> from evidential_ogm.grid import EvidentialGrid, GridSpec
    >>> from evidential_ogm.constants import Hypothesis
    >>> from evidential_ogm.evidence import BeliefMass
    >>> grid = EvidentialGrid.vacuous(GridSpec(length_m=1.0, width_m=1.0, cell_size_m=1.0))
    >>> grid = grid.deposit(0, 0, BeliefMass.from_mapping({Hypothesis.O_S: 0.5}))
    >>> grid_to_rgb(grid)[0, 0].tolist()
    [128, 0, 0]
    """
    masses = grid.masses[..., list(_COLOR_CHANNELS)]
    rgb = np.clip(np.floor(255.0 * masses + 0.5), 0, 255).astype(np.uint8)
    return np.ascontiguousarray(rgb[::-1, ::-1])


def render_png(grid: EvidentialGrid, path: str | Path) -> Path:
    """Write :func:`grid_to_rgb` of ``grid`` as a PNG image."""
    buffer = io.BytesIO()
    Image.fromarray(grid_to_rgb(grid)).save(buffer, format="PNG")
    return atomic_write_bytes(path, buffer.getvalue())
