"""Supercover traversal of grid cells between two cell centres.

A segment joining two cell centres crosses row and column boundaries at
parameters ``(2i - 1) / (2 |dr|)`` and ``(2j - 1) / (2 |dc|)``. Comparing the
crossings with integers walks every cell whose closed square the segment
touches. When a row and a column boundary are crossed at once the segment
passes exactly through a cell corner: both side cells and the diagonal cell
are entered at the same parameter and share one rank.

Ranks order cells by the parameter at which the segment first enters them,
starting with 0 for the start cell.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import NDArray

__all__ = [
    "RayTraversal",
    "border_cells",
    "border_traversal",
    "supercover",
    "supercover_batch",
]


def supercover(
    start: tuple[int, int], end: tuple[int, int]
) -> Iterator[tuple[int, int, int]]:
    """
    Yield ``(row, col, rank)`` for every cell between two cell centres.

    Examples
    --------
    >>> list(supercover((0, 0), (1, 1)))
    [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    >>> [cell[:2] for cell in supercover((0, 0), (0, 3))]
    [(0, 0), (0, 1), (0, 2), (0, 3)]
    """
    row, col = start
    dr = end[0] - row
    dc = end[1] - col
    nr, nc = abs(dr), abs(dc)
    sr = 1 if dr > 0 else -1
    sc = 1 if dc > 0 else -1
    rank = 0
    yield row, col, rank
    i = j = 1
    while i <= nr or j <= nc:
        row_time = (2 * i - 1) * nc if i <= nr else None
        col_time = (2 * j - 1) * nr if j <= nc else None
        rank += 1
        if col_time is None or (row_time is not None and row_time < col_time):
            row += sr
            i += 1
            yield row, col, rank
        elif row_time is None or col_time < row_time:
            col += sc
            j += 1
            yield row, col, rank
        else:
            # corner crossing
            yield row + sr, col, rank
            yield row, col + sc, rank
            row += sr
            col += sc
            i += 1
            j += 1
            yield row, col, rank


@dataclass(frozen=True, slots=True)
class RayTraversal:
    """Flattened traversals of many rays.

    Entry ``k`` says ray ``ray[k]`` touches cell ``(rows[k], cols[k])`` at
    rank ``ranks[k]``.
    """

    ray: NDArray[np.int64]
    rows: NDArray[np.int64]
    cols: NDArray[np.int64]
    ranks: NDArray[np.int64]

    @property
    def ray_count(self) -> int:
        return int(self.ray.max()) + 1 if self.ray.size else 0

    def cells_of(self, ray: int) -> list[tuple[int, int, int]]:
        """Entries of one ray sorted by rank, for inspection and tests."""
        sel = self.ray == ray
        order = np.lexsort((self.cols[sel], self.rows[sel], self.ranks[sel]))
        return [
            (int(r), int(c), int(k))
            for r, c, k in zip(
                self.rows[sel][order],
                self.cols[sel][order],
                self.ranks[sel][order],
                strict=True,
            )
        ]


def supercover_batch(
    start: tuple[int, int],
    ends: NDArray[np.integer],
) -> RayTraversal:
    """
    Vectorised :func:`supercover` from one start cell to many end cells.

    Parameters
    ----------
    start : tuple[int, int]
        Common start cell.
    ends : ndarray
        ``(n, 2)`` end cells.

    Returns
    -------
    RayTraversal
        Entries in walk order; ray ``k`` belongs to ``ends[k]``.
    """
    ends = np.asarray(ends, dtype=np.int64).reshape(-1, 2)
    n = len(ends)
    row = np.full(n, start[0], dtype=np.int64)
    col = np.full(n, start[1], dtype=np.int64)
    dr = ends[:, 0] - start[0]
    dc = ends[:, 1] - start[1]
    nr, nc = np.abs(dr), np.abs(dc)
    sr = np.where(dr > 0, 1, -1)
    sc = np.where(dc > 0, 1, -1)
    i = np.ones(n, dtype=np.int64)
    j = np.ones(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    ray_ids = np.arange(n, dtype=np.int64)
    never = np.iinfo(np.int64).max

    chunks: list[tuple[NDArray[np.int64], ...]] = [(ray_ids, row.copy(), col.copy(), rank.copy())]
    while True:
        row_left = i <= nr
        col_left = j <= nc
        active = row_left | col_left
        if not active.any():
            break
        row_time = np.where(row_left, (2 * i - 1) * nc, never)
        col_time = np.where(col_left, (2 * j - 1) * nr, never)
        row_step = active & (row_time <= col_time)
        col_step = active & (col_time <= row_time)
        corner = row_step & col_step
        rank = rank + active
        if corner.any():
            ids = ray_ids[corner]
            chunks.append((ids, row[corner] + sr[corner], col[corner], rank[corner]))
            chunks.append((ids, row[corner], col[corner] + sc[corner], rank[corner]))
        row = row + sr * row_step
        col = col + sc * col_step
        i = i + row_step
        j = j + col_step
        chunks.append((ray_ids[active], row[active], col[active], rank[active]))

    ray, rows, cols, ranks = (np.concatenate(parts) for parts in zip(*chunks, strict=True))
    return RayTraversal(ray=ray, rows=rows, cols=cols, ranks=ranks)


def border_cells(rows: int, cols: int) -> NDArray[np.int64]:
    """``(n, 2)`` indices of the outermost ring of a grid, each cell once."""
    mask = np.zeros((rows, cols), dtype=bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    return np.argwhere(mask).astype(np.int64)


@lru_cache(maxsize=32)
def border_traversal(rows: int, cols: int, sensor: tuple[int, int]) -> RayTraversal:
    """Traversals from the sensor cell to every border cell, cached per geometry."""
    traversal = supercover_batch(sensor, border_cells(rows, cols))
    for array in (traversal.ray, traversal.rows, traversal.cols, traversal.ranks):
        array.setflags(write=False)
    return traversal
