"""Tests for masked evaluation and its reports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pyarrow.parquet as pq
import pytest

from evidential_ogm.constants import EVALUATED_LABELS, CellLabel, Hypothesis
from evidential_ogm.errors import DomainError
from evidential_ogm.evaluation.metrics import (
    ConfusionCounts,
    StateCounts,
    aggregate,
    evaluate_pair,
)
from evidential_ogm.evaluation.report import (
    counts_frame,
    format_metric,
    format_report_table,
    report_to_dict,
    write_counts_parquet,
    write_report,
)
from evidential_ogm.evidence.mass import CHANNEL_INDEX, BeliefMass, classify_cell
from evidential_ogm.grid.grid import EvidentialGrid
from evidential_ogm.grid.spec import GridSpec

from .conftest import one_hot_masses, random_masses

_F = CHANNEL_INDEX[Hypothesis.F]
_OS = CHANNEL_INDEX[Hypothesis.O_S]
_OD = CHANNEL_INDEX[Hypothesis.O_D]
_THETA = CHANNEL_INDEX[Hypothesis.THETA]


@pytest.fixture
def two() -> GridSpec:
    """2 x 2 grid of 1 m cells."""
    return GridSpec(length_m=2.0, width_m=2.0, cell_size_m=1.0)


@pytest.fixture
def pair(two: GridSpec) -> tuple[EvidentialGrid, EvidentialGrid]:
    """Prediction and truth: one hit, one confusion, one masked cell."""
    truth = EvidentialGrid(two, one_hot_masses(np.array([[_F, _OS], [_OD, _THETA]])))
    pred = EvidentialGrid(two, one_hot_masses(np.array([[_F, _OD], [_OD, _F]])))
    return pred, truth


def _counts(states: dict[CellLabel, StateCounts], sample: str = "") -> ConfusionCounts:
    full = {label: StateCounts() for label in EVALUATED_LABELS}
    full.update(states)
    return ConfusionCounts(states=full, sample=sample)


def _positive(label: CellLabel, state: CellLabel) -> bool:
    if state is CellLabel.O_SD:
        return label.is_occupied
    return label is state


def _label_of(values: list[float], threshold: float) -> CellLabel:
    """Threshold rule spelled out on plain floats."""
    f, o_s, o_d, o_sd, _ = values
    best, label = f, CellLabel.F
    if o_s > best:
        best, label = o_s, CellLabel.O_S
    if o_d > best:
        best, label = o_d, CellLabel.O_D
    if best > threshold:
        return label
    if o_s + o_d + o_sd > threshold:
        return CellLabel.O_SD
    return CellLabel.UNKNOWN


def _tally_cells(
    pred: list[list[float]],
    truth: list[list[float]],
    threshold: float = 0.5,
    mask_level: float = 0.5,
) -> tuple[dict[CellLabel, list[int]], int, int]:
    """Per-state ``[tp, fp, fn]`` plus evaluated and unknown-truth cell counts."""
    expected = {label: [0, 0, 0] for label in EVALUATED_LABELS}
    evaluated = unknown = 0
    for p_values, t_values in zip(pred, truth, strict=True):
        if t_values[4] >= mask_level:
            continue
        evaluated += 1
        t = _label_of(t_values, threshold)
        if t is CellLabel.UNKNOWN:
            unknown += 1
            continue
        p = _label_of(p_values, threshold)
        for state in EVALUATED_LABELS:
            pp, tp = _positive(p, state), _positive(t, state)
            if pp and tp:
                expected[state][0] += 1
            elif pp:
                expected[state][1] += 1
            elif tp:
                expected[state][2] += 1
    return expected, evaluated, unknown


class TestEvaluatePair:
    """Per-sample confusion counts."""

    def test_fixture_counts(self, pair: tuple[EvidentialGrid, EvidentialGrid]) -> None:
        """Counts of the 2 x 2 example."""
        counts = evaluate_pair(*pair)
        assert counts.evaluated_cells == 3
        assert counts.masked_cells == 1
        assert counts[CellLabel.F] == StateCounts(tp=1)
        assert counts[CellLabel.O_S] == StateCounts(fn=1)
        assert counts[CellLabel.O_D] == StateCounts(tp=1, fp=1)
        assert counts[CellLabel.O_SD] == StateCounts(tp=2)
        assert counts[CellLabel.O_D].precision == 0.5
        assert counts[CellLabel.O_S].precision is None
        assert counts[CellLabel.O_S].recall == 0.0

    def test_identical_grids_are_perfect(self, two: GridSpec, rng: np.random.Generator) -> None:
        """A grid scored against itself has no errors."""
        grid = EvidentialGrid(two, random_masses(rng, two.shape))
        counts = evaluate_pair(grid, grid)
        for label in EVALUATED_LABELS:
            assert counts[label].fp == 0
            assert counts[label].fn == 0

    @pytest.mark.parametrize(("threshold", "mask_level"), [(0.5, 0.5), (0.3, 0.2), (0.6, 0.9)])
    def test_matches_cell_loop(
        self, rng: np.random.Generator, threshold: float, mask_level: float
    ) -> None:
        """Vectorised counts equal a cell-by-cell tally."""
        spec = GridSpec(length_m=16.0, width_m=16.0, cell_size_m=1.0)
        sharp = random_masses(rng, spec.shape) ** 3
        sharp /= sharp.sum(axis=-1, keepdims=True)
        truth = EvidentialGrid(spec, sharp)
        pred = EvidentialGrid(spec, random_masses(rng, spec.shape))
        counts = evaluate_pair(pred, truth, threshold, mask_level)

        expected = {label: [0, 0, 0] for label in EVALUATED_LABELS}
        evaluated = unknown = 0
        for index in np.ndindex(spec.shape):
            if truth.masses[index][_THETA] >= mask_level:
                continue
            evaluated += 1
            t = classify_cell(BeliefMass.from_array(truth.masses[index]), threshold)
            if t is CellLabel.UNKNOWN:
                unknown += 1
                continue
            p = classify_cell(BeliefMass.from_array(pred.masses[index]), threshold)
            for state in EVALUATED_LABELS:
                pp, tp = _positive(p, state), _positive(t, state)
                expected[state][0] += pp and tp
                expected[state][1] += pp and not tp
                expected[state][2] += tp and not pp
        assert counts.evaluated_cells == evaluated
        assert counts.unknown_truth_cells == unknown
        for state, (tp, fp, fn) in expected.items():
            assert counts[state] == StateCounts(tp=tp, fp=fp, fn=fn)

    def test_matches_cell_loop_on_many_pairs(self) -> None:
        """A plain per-cell tally agrees on 1,000 random 16 x 16 pairs."""
        rng = np.random.default_rng(4242)
        spec = GridSpec(length_m=16.0, width_m=16.0, cell_size_m=1.0)
        raw = rng.random((1000, 2, *spec.shape, 5))
        raw[:, 1] **= 3
        raw /= raw.sum(axis=-1, keepdims=True)
        for pred_masses, truth_masses in raw:
            counts = evaluate_pair(
                EvidentialGrid(spec, pred_masses), EvidentialGrid(spec, truth_masses)
            )
            expected, evaluated, unknown = _tally_cells(
                pred_masses.reshape(-1, 5).tolist(), truth_masses.reshape(-1, 5).tolist()
            )
            assert counts.evaluated_cells == evaluated
            assert counts.masked_cells == spec.rows * spec.cols - evaluated
            assert counts.unknown_truth_cells == unknown
            for state in EVALUATED_LABELS:
                assert counts[state] == StateCounts(*expected[state])
            occupied_tp = counts[CellLabel.O_SD].tp
            assert occupied_tp >= max(counts[CellLabel.O_S].tp, counts[CellLabel.O_D].tp)

    def test_unknown_prediction_is_false_negative(self, two: GridSpec) -> None:
        """A prediction without label misses the truth state."""
        truth = EvidentialGrid(two, one_hot_masses(np.full(two.shape, _F)))
        counts = evaluate_pair(EvidentialGrid.vacuous(two), truth)
        assert counts[CellLabel.F] == StateCounts(fn=4)

    def test_unknown_truth_is_not_scored(self, two: GridSpec) -> None:
        """Evaluated truth cells without a label count only as unknown."""
        masses = np.zeros((*two.shape, 5))
        masses[..., _F] = 0.4
        masses[..., _OS] = 0.3
        masses[..., _THETA] = 0.3
        truth = EvidentialGrid(two, masses)
        counts = evaluate_pair(truth, truth)
        assert counts.evaluated_cells == 4
        assert counts.unknown_truth_cells == 4
        assert all(counts[label] == StateCounts() for label in EVALUATED_LABELS)

    def test_mask_level_grows_evaluated_cells(self, rng: np.random.Generator) -> None:
        """Raising mask_level never removes cells from evaluation."""
        spec = GridSpec(length_m=8.0, width_m=8.0, cell_size_m=1.0)
        truth = EvidentialGrid(spec, random_masses(rng, spec.shape))
        pred = EvidentialGrid(spec, random_masses(rng, spec.shape))
        evaluated = [
            evaluate_pair(pred, truth, 0.5, level).evaluated_cells
            for level in np.linspace(0.05, 1.0, 20)
        ]
        assert evaluated == sorted(evaluated)

    @pytest.mark.parametrize("mask_level", [0.1, 0.5, 1.0])
    def test_cells_are_partitioned(
        self, rng: np.random.Generator, mask_level: float
    ) -> None:
        """Every cell is either evaluated or masked."""
        spec = GridSpec(length_m=8.0, width_m=8.0, cell_size_m=1.0)
        truth = EvidentialGrid(spec, random_masses(rng, spec.shape))
        counts = evaluate_pair(truth, truth, 0.5, mask_level)
        assert counts.evaluated_cells + counts.masked_cells == 64

    def test_geometry_mismatch(self, two: GridSpec, small_spec: GridSpec) -> None:
        """Grids of different rasters cannot be compared."""
        with pytest.raises(DomainError, match="disagree"):
            evaluate_pair(EvidentialGrid.vacuous(two), EvidentialGrid.vacuous(small_spec))

    @pytest.mark.parametrize(("threshold", "mask_level"), [(0.0, 0.5), (0.5, 1.5)])
    def test_level_domain(self, two: GridSpec, threshold: float, mask_level: float) -> None:
        """Threshold and mask level lie in (0, 1]."""
        grid = EvidentialGrid.vacuous(two)
        with pytest.raises(DomainError):
            evaluate_pair(grid, grid, threshold, mask_level)


class TestAggregate:
    """Micro and macro averaging."""

    def test_micro(self) -> None:
        """Counts are summed before dividing."""
        a = _counts({CellLabel.F: StateCounts(tp=1, fp=1)})
        b = _counts({CellLabel.F: StateCounts(tp=3)})
        report = aggregate([a, b])
        assert report[CellLabel.F].precision == pytest.approx(0.8)
        assert report[CellLabel.F].tp == 4
        assert report.sample_count == 2

    def test_macro(self) -> None:
        """Ratios are averaged over samples where they are defined."""
        a = _counts({CellLabel.F: StateCounts(tp=1, fp=1), CellLabel.O_S: StateCounts(tp=1)})
        b = _counts({CellLabel.F: StateCounts(tp=3)})
        report = aggregate([a, b], "macro")
        assert report[CellLabel.F].precision == pytest.approx(0.75)
        assert report[CellLabel.O_S].precision == 1.0
        assert report.averaging == "macro"

    def test_undefined_ratios(self) -> None:
        """States never seen have no scores."""
        report = aggregate([_counts({})])
        assert report[CellLabel.O_D].precision is None
        assert report[CellLabel.O_D].recall is None
        assert report[CellLabel.O_D].f1 is None

    def test_empty(self) -> None:
        """At least one sample is needed."""
        with pytest.raises(DomainError, match="empty"):
            aggregate([])

    def test_unknown_mode(self) -> None:
        """Only micro and macro exist."""
        with pytest.raises(DomainError, match="averaging"):
            aggregate([_counts({})], "weighted")  # type: ignore[arg-type]

    def test_missing_state(self) -> None:
        """Looking up a state outside the report fails."""
        with pytest.raises(KeyError):
            aggregate([_counts({})])[CellLabel.UNKNOWN]


class TestReport:
    """JSON, text and Parquet output."""

    def test_format_metric(self) -> None:
        """Four decimals or n/a."""
        assert format_metric(0.5) == "0.5000"
        assert format_metric(None) == "n/a"

    def test_dict_uses_null(self, pair: tuple[EvidentialGrid, EvidentialGrid]) -> None:
        """Undefined ratios serialise as null and states by name."""
        document = report_to_dict(aggregate([evaluate_pair(*pair)]))
        states = {m["state"]: m for m in document["metrics"]}
        assert set(states) == {"F", "O_s", "O_d", "O_sd"}
        assert states["O_s"]["precision"] is None
        assert states["O_d"]["precision"] == 0.5
        assert document["evaluated_cells"] == 3

    def test_write_report(
        self, tmp_path: Path, pair: tuple[EvidentialGrid, EvidentialGrid]
    ) -> None:
        """The JSON report has a text table beside it."""
        report = aggregate([evaluate_pair(*pair)])
        path = write_report(report, tmp_path / "report.json")
        document = json.loads(path.read_text())
        assert document["sample_count"] == 1
        text = (tmp_path / "report.txt").read_text()
        assert text.startswith("# samples=1 averaging=micro evaluated_cells=3")
        assert "n/a" in text
        assert text == format_report_table(report)

    def test_counts_parquet(
        self, tmp_path: Path, pair: tuple[EvidentialGrid, EvidentialGrid]
    ) -> None:
        """Per-sample counts round-trip through Parquet."""
        counts = [evaluate_pair(*pair, sample="a"), evaluate_pair(*pair, sample="b")]
        path = write_counts_parquet(counts, tmp_path / "counts.parquet")
        frame = pd.read_parquet(path)
        assert frame.to_dict("records") == counts_frame(counts).to_dict("records")
        assert len(frame) == 8
        row = frame[(frame["sample"] == "b") & (frame["state"] == "O_d")].iloc[0]
        assert (row["tp"], row["fp"], row["fn"]) == (1, 1, 0)

    def test_counts_parquet_replaces_atomically(
        self, tmp_path: Path, pair: tuple[EvidentialGrid, EvidentialGrid]
    ) -> None:
        """Rewriting the counts replaces the file and leaves no temporary behind."""
        target = tmp_path / "out" / "counts.parquet"
        write_counts_parquet([evaluate_pair(*pair, sample="a")], target)
        write_counts_parquet([evaluate_pair(*pair, sample="b")], target)
        assert sorted(p.name for p in target.parent.iterdir()) == ["counts.parquet"]
        assert set(pd.read_parquet(target)["sample"]) == {"b"}
        metadata = pq.ParquetFile(target).metadata
        assert metadata.row_group(0).column(0).compression == "ZSTD"
