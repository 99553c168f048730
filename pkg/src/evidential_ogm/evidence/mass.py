"""Belief masses over the reduced power set and Dempster's rule.

Scalar operations work on :class:`BeliefMass` values. The ``*_masses`` and
``*_arrays`` functions apply the same arithmetic, in the same order, to
``(..., 5)`` arrays laid out in :data:`~evidential_ogm.constants.MASS_CHANNELS`
order, so a grid-wide combination agrees bit-exactly with cell-wise scalar
calls.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from evidential_ogm.constants import (
    MASS_CHANNELS,
    MASS_SUM_TOLERANCE,
    TOTAL_CONFLICT_TOLERANCE,
    CellLabel,
    Hypothesis,
)
from evidential_ogm.errors import ConflictError, DomainError

if TYPE_CHECKING:
    from numpy.typing import NDArray

__all__ = [
    "CHANNEL_INDEX",
    "INTERSECTION_TABLE",
    "LABEL_CODES",
    "BeliefMass",
    "classify_cell",
    "classify_masses",
    "combine_dempster",
    "combine_dempster_arrays",
    "combine_free_static_supports",
    "simple_support_masses",
    "vacuous_masses",
]

CHANNEL_INDEX: dict[Hypothesis, int] = {h: i for i, h in enumerate(MASS_CHANNELS)}

# INTERSECTION_TABLE[i][j] is the channel of MASS_CHANNELS[i] & MASS_CHANNELS[j],
# or None for the empty set.
INTERSECTION_TABLE: tuple[tuple[int | None, ...], ...] = tuple(
    tuple(CHANNEL_INDEX.get(a & b) if (a & b) else None for b in MASS_CHANNELS)
    for a in MASS_CHANNELS
)

# Integer codes used by classify_masses, indexable into this tuple.
LABEL_CODES: tuple[CellLabel, ...] = (
    CellLabel.F,
    CellLabel.O_S,
    CellLabel.O_D,
    CellLabel.O_SD,
    CellLabel.UNKNOWN,
)

_F, _OS, _OD, _OSD, _THETA = range(5)


@dataclass(frozen=True, slots=True)
class BeliefMass:
    """Mass assignment ``m(A)`` over the reduced power set.

    Parameters
    ----------
    values : tuple[float, ...]
        Five masses in ``(F, O_s, O_d, {O_s,O_d}, Θ)`` order. Each must lie in
        ``[0, 1]`` and they must sum to 1 within ``1e-9``.

    Examples
    --------
    >>> m = BeliefMass.from_mapping({Hypothesis.F: 0.25})
    >>> m[Hypothesis.THETA]
    0.75
    """

    values: tuple[float, float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.values) != len(MASS_CHANNELS):
            msg = f"expected {len(MASS_CHANNELS)} masses, got {len(self.values)}"
            raise DomainError(msg)
        for hypothesis, value in zip(MASS_CHANNELS, self.values, strict=True):
            if not (-MASS_SUM_TOLERANCE <= value <= 1.0 + MASS_SUM_TOLERANCE):
                msg = f"mass for {hypothesis.name} outside [0, 1]: {value!r}"
                raise DomainError(msg)
        total = sum(self.values)
        if abs(total - 1.0) > MASS_SUM_TOLERANCE:
            msg = f"masses must sum to 1, got {total!r}"
            raise DomainError(msg)

    @classmethod
    def from_mapping(cls, masses: Mapping[Hypothesis, float]) -> BeliefMass:
        """Build a mass from a partial mapping; ``Θ`` absorbs the residual."""
        if Hypothesis(0) in masses:
            msg = "the empty set cannot carry mass"
            raise DomainError(msg)
        values = [0.0] * len(MASS_CHANNELS)
        for hypothesis, value in masses.items():
            values[CHANNEL_INDEX[hypothesis]] = float(value)
        if Hypothesis.THETA not in masses:
            values[_THETA] = 1.0 - sum(values[:_THETA])
        return cls(tuple(values))  # type: ignore[arg-type]

    @classmethod
    def vacuous(cls) -> BeliefMass:
        """Total ignorance, ``m(Θ) = 1``."""
        return cls((0.0, 0.0, 0.0, 0.0, 1.0))

    @classmethod
    def from_array(cls, array: NDArray[np.floating]) -> BeliefMass:
        """Build from a length-5 array in channel order."""
        return cls(tuple(float(v) for v in array))  # type: ignore[arg-type]

    def __getitem__(self, hypothesis: Hypothesis) -> float:
        return self.values[CHANNEL_INDEX[hypothesis]]

    def as_array(self) -> NDArray[np.float64]:
        """Masses as a float64 array in channel order."""
        return np.array(self.values, dtype=np.float64)

    @property
    def is_vacuous(self) -> bool:
        """Whether all mass sits on ``Θ``."""
        return self.values[_THETA] == 1.0

    @property
    def occupied(self) -> float:
        """Mass committed to any occupied hypothesis."""
        return self.values[_OS] + self.values[_OD] + self.values[_OSD]


def combine_dempster(m1: BeliefMass, m2: BeliefMass) -> BeliefMass:
    """Combine two independent mass functions with Dempster's rule.

    Parameters
    ----------
    m1, m2 : BeliefMass
        Operands.

    Returns
    -------
    BeliefMass
        ``m12(X) = Σ_{A∩B=X} m1(A) m2(B) / (1 - κ)``.

    Raises
    ------
    ConflictError
        If the conflict ``κ = Σ_{A∩B=∅} m1(A) m2(B)`` reaches ``1 - 1e-12``.

    Examples
    --------
    >>> free = BeliefMass.from_mapping({Hypothesis.F: 0.1})
    >>> round(combine_dempster(free, free)[Hypothesis.F], 12)
    0.19
    """
    joint = [0.0] * len(MASS_CHANNELS)
    conflict = 0.0
    for i, a in enumerate(m1.values):
        row = INTERSECTION_TABLE[i]
        for j, b in enumerate(m2.values):
            k = row[j]
            if k is None:
                conflict += a * b
            else:
                joint[k] += a * b
    if conflict >= 1.0 - TOTAL_CONFLICT_TOLERANCE:
        raise ConflictError(conflict)
    norm = 1.0 - conflict
    return BeliefMass(tuple(v / norm for v in joint))  # type: ignore[arg-type]


def combine_dempster_arrays(
    m1: NDArray[np.float64],
    m2: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Cell-wise Dempster combination of two ``(..., 5)`` mass arrays.

    Cells in total conflict keep their value from ``m1``.

    Returns
    -------
    combined : ndarray
        Combined masses, same shape as the broadcast operands.
    conflicted : ndarray of bool
        Cells where the combination hit total conflict.
    """
    m1, m2 = np.broadcast_arrays(
        np.asarray(m1, dtype=np.float64), np.asarray(m2, dtype=np.float64)
    )
    shape = m1.shape[:-1]
    joint = np.zeros(m1.shape, dtype=np.float64)
    conflict = np.zeros(shape, dtype=np.float64)
    for i in range(len(MASS_CHANNELS)):
        row = INTERSECTION_TABLE[i]
        a = m1[..., i]
        for j in range(len(MASS_CHANNELS)):
            k = row[j]
            if k is None:
                conflict += a * m2[..., j]
            else:
                joint[..., k] += a * m2[..., j]
    conflicted = conflict >= 1.0 - TOTAL_CONFLICT_TOLERANCE
    norm = np.where(conflicted, 1.0, 1.0 - conflict)
    combined = joint / norm[..., None]
    combined = np.where(conflicted[..., None], m1, combined)
    return combined, conflicted


def classify_cell(m: BeliefMass, threshold: float) -> CellLabel:
    """Classify a cell by thresholding its masses.

    A singleton label is returned when its mass exceeds ``threshold``
    (largest first, ties in ``F, O_s, O_d`` order). Otherwise ``O_sd`` is
    returned when ``m(O_s) + m(O_d) + m({O_s,O_d})`` exceeds it, else
    ``UNKNOWN``. The comparison is strict.

    Examples
    --------
    >>> classify_cell(BeliefMass.from_mapping({Hypothesis.F: 0.6}), 0.5)
    <CellLabel.F: 'F'>
    """
    if not 0.0 < threshold <= 1.0:
        msg = f"threshold must lie in (0, 1], got {threshold!r}"
        raise DomainError(msg)
    values = m.values
    best = _F
    if values[_OS] > values[best]:
        best = _OS
    if values[_OD] > values[best]:
        best = _OD
    if values[best] > threshold:
        return LABEL_CODES[best]
    if values[_OS] + values[_OD] + values[_OSD] > threshold:
        return CellLabel.O_SD
    return CellLabel.UNKNOWN


def classify_masses(masses: NDArray[np.float64], threshold: float) -> NDArray[np.int8]:
    """Array form of :func:`classify_cell`.

    Returns
    -------
    ndarray of int8
        Indices into :data:`LABEL_CODES`.
    """
    if not 0.0 < threshold <= 1.0:
        msg = f"threshold must lie in (0, 1], got {threshold!r}"
        raise DomainError(msg)
    masses = np.asarray(masses, dtype=np.float64)
    singletons = masses[..., :_OSD]
    best = np.argmax(singletons, axis=-1)
    best_mass = np.take_along_axis(singletons, best[..., None], axis=-1)[..., 0]
    occupied = masses[..., _OS] + masses[..., _OD] + masses[..., _OSD]
    labels = np.full(masses.shape[:-1], _THETA, dtype=np.int8)
    labels[occupied > threshold] = _OSD
    singleton_hit = best_mass > threshold
    labels[singleton_hit] = best[singleton_hit]
    return labels


def vacuous_masses(shape: tuple[int, ...]) -> NDArray[np.float64]:
    """Array of vacuous masses with leading ``shape``."""
    masses = np.zeros((*shape, len(MASS_CHANNELS)), dtype=np.float64)
    masses[..., _THETA] = 1.0
    return masses


def simple_support_masses(
    counts: NDArray[np.integer],
    weight: float,
    hypothesis: Hypothesis,
) -> NDArray[np.float64]:
    """Combination of ``counts`` identical simple support functions.

    Each support puts ``weight`` on ``hypothesis`` and the rest on ``Θ``.
    Simple supports for one hypothesis never conflict, so ``n`` of them
    combine to ``m(hypothesis) = 1 - (1 - weight)^n``.
    """
    if not 0.0 <= weight < 1.0:
        msg = f"support weight must lie in [0, 1), got {weight!r}"
        raise DomainError(msg)
    remaining = np.power(1.0 - weight, np.asarray(counts, dtype=np.float64))
    masses = vacuous_masses(remaining.shape)
    masses[..., CHANNEL_INDEX[hypothesis]] = 1.0 - remaining
    masses[..., _THETA] = remaining
    return masses


def combine_free_static_supports(
    free_counts: NDArray[np.integer],
    free_weight: float,
    static_counts: NDArray[np.integer],
    static_weight: float,
) -> NDArray[np.float64]:
    """Dempster combination of free and statically-occupied simple supports.

    Equivalent to depositing ``free_counts`` masses ``m(F) = free_weight`` and
    ``static_counts`` masses ``m(O_s) = static_weight`` one by one, but
    evaluated in closed form. With ``q_F = (1 - w_F)^a``,
    ``q_S = (1 - w_S)^b`` and ``D = q_F + q_S - q_F q_S``::

        m(F) = (1 - q_F) q_S / D
        m(O_s) = q_F (1 - q_S) / D
        m(Θ) = q_F q_S / D

    ``D`` is ``1 - κ`` written without cancellation. Numerators and ``D`` are
    scaled by ``max(q_F, q_S)`` in log space, so cells with thousands of
    contradicting deposits neither underflow nor divide by zero.
    """
    for weight in (free_weight, static_weight):
        if not 0.0 <= weight < 1.0:
            msg = f"support weight must lie in [0, 1), got {weight!r}"
            raise DomainError(msg)
    log_free = np.asarray(free_counts, dtype=np.float64) * np.log1p(-free_weight)
    log_static = np.asarray(static_counts, dtype=np.float64) * np.log1p(
        -static_weight
    )
    log_free, log_static = np.broadcast_arrays(log_free, log_static)
    log_max = np.maximum(log_free, log_static)
    q_free = np.exp(log_free)
    q_static = np.exp(log_static)
    r_free = np.exp(log_free - log_max)
    r_static = np.exp(log_static - log_max)
    norm = r_free + r_static - r_free * q_static
    masses = vacuous_masses(log_max.shape)
    masses[..., _F] = (1.0 - q_free) * r_static / norm
    masses[..., _OS] = r_free * (1.0 - q_static) / norm
    masses[..., _THETA] = r_free * q_static / norm
    return masses
