"""Masked per-state precision and recall of evidential grids."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np

from evidential_ogm.constants import (
    DEFAULT_MASK_LEVEL,
    DEFAULT_THRESHOLD,
    EVALUATED_LABELS,
    CellLabel,
    Hypothesis,
)
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import CHANNEL_INDEX, LABEL_CODES, classify_masses

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from evidential_ogm.grid.grid import EvidentialGrid

__all__ = [
    "Averaging",
    "ConfusionCounts",
    "EvalReport",
    "StateCounts",
    "StateMetrics",
    "aggregate",
    "evaluate_pair",
    "ratio",
]

Averaging = Literal["micro", "macro"]

_UNKNOWN = LABEL_CODES.index(CellLabel.UNKNOWN)
_OCCUPIED_CODES = tuple(LABEL_CODES.index(label) for label in LABEL_CODES if label.is_occupied)


def ratio(numerator: int, denominator: int) -> float | None:
    """``numerator / denominator``, or None when the denominator is zero."""
    if denominator == 0:
        return None
    return numerator / denominator


@dataclass(frozen=True, slots=True)
class StateCounts:
    """Confusion counts of one state."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: StateCounts) -> StateCounts:
        return StateCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self) -> float | None:
        return ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float | None:
        return ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float | None:
        return ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn)


def _empty_states() -> dict[CellLabel, StateCounts]:
    return {label: StateCounts() for label in EVALUATED_LABELS}


@dataclass(frozen=True, slots=True)
class ConfusionCounts:
    """
    Per-state counts of one sample, or of several summed.

    ``evaluated_cells + masked_cells`` is the number of grid cells.
    ``unknown_truth_cells`` counts evaluated cells whose ground truth has no
    label at the threshold; they contribute to no state.
    """

    states: Mapping[CellLabel, StateCounts] = field(default_factory=_empty_states)
    evaluated_cells: int = 0
    masked_cells: int = 0
    unknown_truth_cells: int = 0
    sample: str = ""

    def __getitem__(self, label: CellLabel) -> StateCounts:
        return self.states[label]

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        return ConfusionCounts(
            states={label: self[label] + other[label] for label in EVALUATED_LABELS},
            evaluated_cells=self.evaluated_cells + other.evaluated_cells,
            masked_cells=self.masked_cells + other.masked_cells,
            unknown_truth_cells=self.unknown_truth_cells + other.unknown_truth_cells,
        )


@dataclass(frozen=True, slots=True)
class StateMetrics:
    """Scores of one state; None marks an undefined ratio."""

    state: CellLabel
    precision: float | None
    recall: float | None
    f1: float | None
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Aggregated scores over a set of samples."""

    metrics: tuple[StateMetrics, ...]
    sample_count: int
    averaging: Averaging
    evaluated_cells: int
    masked_cells: int
    unknown_truth_cells: int

    def __getitem__(self, label: CellLabel) -> StateMetrics:
        for metric in self.metrics:
            if metric.state == label:
                return metric
        raise KeyError(label)


def _check_level(name: str, value: float) -> None:
    if not 0.0 < value <= 1.0:
        msg = f"{name} must lie in (0, 1], got {value!r}"
        raise DomainError(msg)


def _state_counts(
    pred_positive: NDArray[np.bool_], truth_positive: NDArray[np.bool_]
) -> StateCounts:
    return StateCounts(
        tp=int(np.count_nonzero(pred_positive & truth_positive)),
        fp=int(np.count_nonzero(pred_positive & ~truth_positive)),
        fn=int(np.count_nonzero(~pred_positive & truth_positive)),
    )


def evaluate_pair(
    pred: EvidentialGrid,
    truth: EvidentialGrid,
    threshold: float = DEFAULT_THRESHOLD,
    mask_level: float = DEFAULT_MASK_LEVEL,
    sample: str = "",
) -> ConfusionCounts:
    """
    Confusion counts of a predicted grid against its ground truth.

    Cells with truth ``m(Θ) >= mask_level`` are masked. Both grids are
    classified with :func:`~evidential_ogm.evidence.mass.classify_masses`.
    For a singleton state ``A`` a cell is a true positive when both labels
    are ``A``, a false positive when only the prediction is ``A`` and a false
    negative when only the truth is ``A``. For ``O_sd`` a label is positive
    when it is ``O_s``, ``O_d`` or ``O_sd``. A prediction without label is a
    false negative of the truth state.

    Raises
    ------
    DomainError
        If the grids differ in geometry or a level lies outside ``(0, 1]``.
    """
    _check_level("threshold", threshold)
    _check_level("mask_level", mask_level)
    pred.spec.require_compatible(truth.spec, "prediction and truth")

    known = truth.masses[..., CHANNEL_INDEX[Hypothesis.THETA]] < mask_level
    truth_codes = classify_masses(truth.masses, threshold)
    pred_codes = classify_masses(pred.masses, threshold)
    unknown_truth = known & (truth_codes == _UNKNOWN)
    scored = known & ~unknown_truth
    truth_codes = truth_codes[scored]
    pred_codes = pred_codes[scored]

    states: dict[CellLabel, StateCounts] = {}
    for label in EVALUATED_LABELS:
        if label is CellLabel.O_SD:
            pred_positive = np.isin(pred_codes, _OCCUPIED_CODES)
            truth_positive = np.isin(truth_codes, _OCCUPIED_CODES)
        else:
            code = LABEL_CODES.index(label)
            pred_positive = pred_codes == code
            truth_positive = truth_codes == code
        states[label] = _state_counts(pred_positive, truth_positive)

    evaluated = int(np.count_nonzero(known))
    return ConfusionCounts(
        states=states,
        evaluated_cells=evaluated,
        masked_cells=known.size - evaluated,
        unknown_truth_cells=int(np.count_nonzero(unknown_truth)),
        sample=sample,
    )


def _mean_defined(values: Iterable[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def aggregate(
    reports: Iterable[ConfusionCounts],
    averaging: Averaging = "micro",
) -> EvalReport:
    """
    Combine per-sample counts into scores.

    ``micro`` sums the counts over all samples before dividing. ``macro``
    averages the per-sample ratios over the samples where they are defined.
    Undefined ratios stay None.

    Examples
    --------
    >>> a = ConfusionCounts(states={**_empty_states(), CellLabel.F: StateCounts(tp=1, fp=1)})
    >>> b = ConfusionCounts(states={**_empty_states(), CellLabel.F: StateCounts(tp=3)})
    >>> aggregate([a, b])[CellLabel.F].precision
    0.8
    """
    reports = list(reports)
    if not reports:
        msg = "cannot aggregate an empty list of confusion counts"
        raise DomainError(msg)
    if averaging not in ("micro", "macro"):
        msg = f"unknown averaging mode {averaging!r}"
        raise DomainError(msg)
    total = reports[0]
    for report in reports[1:]:
        total = total + report

    metrics = []
    for label in EVALUATED_LABELS:
        summed = total[label]
        if averaging == "micro":
            precision, recall, f1 = summed.precision, summed.recall, summed.f1
        else:
            precision = _mean_defined(r[label].precision for r in reports)
            recall = _mean_defined(r[label].recall for r in reports)
            f1 = _mean_defined(r[label].f1 for r in reports)
        metrics.append(
            StateMetrics(
                state=label,
                precision=precision,
                recall=recall,
                f1=f1,
                tp=summed.tp,
                fp=summed.fp,
                fn=summed.fn,
            )
        )
    return EvalReport(
        metrics=tuple(metrics),
        sample_count=len(reports),
        averaging=averaging,
        evaluated_cells=total.evaluated_cells,
        masked_cells=total.masked_cells,
        unknown_truth_cells=total.unknown_truth_cells,
    )
