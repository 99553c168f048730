"""Tests for belief masses, Dempster's rule and threshold classification."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evidential_ogm.constants import MASS_CHANNELS, CellLabel, Hypothesis
from evidential_ogm.errors import ConflictError, DomainError
from evidential_ogm.evidence.mass import (
    CHANNEL_INDEX,
    LABEL_CODES,
    BeliefMass,
    classify_cell,
    classify_masses,
    combine_dempster,
    combine_dempster_arrays,
    combine_free_static_supports,
    simple_support_masses,
    vacuous_masses,
)

from .conftest import belief_masses, random_masses

_SETS = {
    Hypothesis.F: frozenset({"F"}),
    Hypothesis.O_S: frozenset({"O_s"}),
    Hypothesis.O_D: frozenset({"O_d"}),
    Hypothesis.O_SD: frozenset({"O_s", "O_d"}),
    Hypothesis.THETA: frozenset({"F", "O_s", "O_d"}),
}


def _dempster_by_sets(m1: BeliefMass, m2: BeliefMass) -> tuple[float, ...]:
    """Dempster's rule written with explicit set intersections."""
    by_set = {s: 0.0 for s in _SETS.values()}
    conflict = 0.0
    for a, va in zip(MASS_CHANNELS, m1.values, strict=True):
        for b, vb in zip(MASS_CHANNELS, m2.values, strict=True):
            common = _SETS[a] & _SETS[b]
            if common:
                by_set[common] += va * vb
            else:
                conflict += va * vb
    return tuple(by_set[_SETS[h]] / (1.0 - conflict) for h in MASS_CHANNELS)


class TestBeliefMass:
    """Construction and validation of mass assignments."""

    def test_from_mapping_puts_residual_on_theta(self) -> None:
        """Unlisted mass goes to Θ."""
        m = BeliefMass.from_mapping({Hypothesis.O_S: 0.3, Hypothesis.O_SD: 0.2})
        assert m[Hypothesis.THETA] == pytest.approx(0.5)
        assert m.occupied == pytest.approx(0.5)

    def test_vacuous(self) -> None:
        """The vacuous mass is all ignorance."""
        assert BeliefMass.vacuous().is_vacuous
        assert not BeliefMass.from_mapping({Hypothesis.F: 0.1}).is_vacuous

    def test_rejects_bad_sum(self) -> None:
        """Masses that do not sum to 1 are rejected."""
        with pytest.raises(DomainError, match="sum to 1"):
            BeliefMass((0.5, 0.0, 0.0, 0.0, 0.6))

    def test_rejects_negative(self) -> None:
        """Negative mass is outside [0, 1]."""
        with pytest.raises(DomainError, match="outside"):
            BeliefMass((-0.1, 0.1, 0.0, 0.0, 1.0))

    def test_rejects_wrong_length(self) -> None:
        """Exactly five channels are required."""
        with pytest.raises(DomainError, match="expected 5"):
            BeliefMass((1.0,))  # type: ignore[arg-type]

    def test_rejects_empty_set(self) -> None:
        """The empty set never carries mass."""
        with pytest.raises(DomainError, match="empty set"):
            BeliefMass.from_mapping({Hypothesis(0): 0.1})

    def test_domain_error_is_value_error(self) -> None:
        """Callers catching ValueError also see domain errors."""
        with pytest.raises(ValueError):
            BeliefMass((2.0, 0.0, 0.0, 0.0, -1.0))

    def test_array_round_trip(self) -> None:
        """as_array and from_array agree."""
        m = BeliefMass.from_mapping({Hypothesis.O_D: 0.25, Hypothesis.F: 0.5})
        assert BeliefMass.from_array(m.as_array()) == m


class TestCombineDempster:
    """Dempster's rule on scalar masses."""

    def test_repeated_free_support(self) -> None:
        """Two 0.1 free supports combine to 0.19."""
        free = BeliefMass.from_mapping({Hypothesis.F: 0.1})
        combined = combine_dempster(free, free)
        assert combined[Hypothesis.F] == pytest.approx(0.19, abs=1e-12)
        assert combined[Hypothesis.THETA] == pytest.approx(0.81, abs=1e-12)

    def test_conflicting_singletons(self) -> None:
        """F against O_s renormalises away the conflict."""
        free = BeliefMass.from_mapping({Hypothesis.F: 0.5})
        static = BeliefMass.from_mapping({Hypothesis.O_S: 0.5})
        combined = combine_dempster(free, static)
        assert combined[Hypothesis.F] == pytest.approx(1 / 3, abs=1e-12)
        assert combined[Hypothesis.O_S] == pytest.approx(1 / 3, abs=1e-12)
        assert combined[Hypothesis.THETA] == pytest.approx(1 / 3, abs=1e-12)

    def test_occupied_refines_to_dynamic(self) -> None:
        """{O_s, O_d} combined with O_d lands on O_d."""
        occupied = BeliefMass.from_mapping({Hypothesis.O_SD: 1.0})
        dynamic = BeliefMass.from_mapping({Hypothesis.O_D: 0.4})
        combined = combine_dempster(occupied, dynamic)
        assert combined[Hypothesis.O_D] == pytest.approx(0.4)
        assert combined[Hypothesis.O_SD] == pytest.approx(0.6)

    def test_total_conflict(self) -> None:
        """Certain F against certain O_s cannot be combined."""
        free = BeliefMass.from_mapping({Hypothesis.F: 1.0})
        static = BeliefMass.from_mapping({Hypothesis.O_S: 1.0})
        with pytest.raises(ConflictError) as info:
            combine_dempster(free, static)
        assert info.value.conflict == pytest.approx(1.0)

    @given(belief_masses())
    def test_vacuous_identity(self, m: BeliefMass) -> None:
        """Combining with the vacuous mass changes nothing."""
        assert combine_dempster(m, BeliefMass.vacuous()) == m
        assert combine_dempster(BeliefMass.vacuous(), m) == m

    @given(belief_masses(), belief_masses())
    def test_commutative(self, m1: BeliefMass, m2: BeliefMass) -> None:
        """Operand order does not matter."""
        np.testing.assert_allclose(
            combine_dempster(m1, m2).as_array(),
            combine_dempster(m2, m1).as_array(),
            rtol=0,
            atol=1e-12,
        )

    @given(belief_masses(), belief_masses(), belief_masses())
    def test_associative(self, m1: BeliefMass, m2: BeliefMass, m3: BeliefMass) -> None:
        """Grouping does not matter."""
        left = combine_dempster(combine_dempster(m1, m2), m3)
        right = combine_dempster(m1, combine_dempster(m2, m3))
        np.testing.assert_allclose(left.as_array(), right.as_array(), rtol=0, atol=1e-9)

    @given(belief_masses(), belief_masses())
    def test_matches_set_intersections(self, m1: BeliefMass, m2: BeliefMass) -> None:
        """The channel table agrees with explicit set intersections."""
        np.testing.assert_allclose(
            combine_dempster(m1, m2).as_array(),
            _dempster_by_sets(m1, m2),
            rtol=0,
            atol=1e-12,
        )

    @given(belief_masses(), belief_masses())
    def test_result_is_normalised(self, m1: BeliefMass, m2: BeliefMass) -> None:
        """The result is a valid mass."""
        combined = combine_dempster(m1, m2).as_array()
        assert combined.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(combined >= 0.0)


def _seeded_masses(rng: np.random.Generator, n: int) -> list[BeliefMass]:
    """Random masses with at least a third of their weight on Θ."""
    raw = rng.random((n, len(MASS_CHANNELS)))
    raw[:, CHANNEL_INDEX[Hypothesis.THETA]] += 2.0
    raw /= raw.sum(axis=1, keepdims=True)
    return [BeliefMass.from_array(row) for row in raw]


class TestDempsterAtScale:
    """Algebraic laws of the combination on 10,000 seeded masses each."""

    SIZE = 10_000

    @pytest.fixture(scope="class")
    @classmethod
    def operands(cls) -> tuple[list[BeliefMass], list[BeliefMass], list[BeliefMass]]:
        rng = np.random.default_rng(31337)
        return (
            _seeded_masses(rng, cls.SIZE),
            _seeded_masses(rng, cls.SIZE),
            _seeded_masses(rng, cls.SIZE),
        )

    def test_commutative(self, operands: tuple[list[BeliefMass], ...]) -> None:
        """Swapping operands changes no component by more than 1e-12."""
        first, second, _ = operands
        ab = np.array([combine_dempster(a, b).values for a, b in zip(first, second, strict=True)])
        ba = np.array([combine_dempster(b, a).values for a, b in zip(first, second, strict=True)])
        np.testing.assert_allclose(ab, ba, rtol=0, atol=1e-12)

    def test_associative(self, operands: tuple[list[BeliefMass], ...]) -> None:
        """Regrouping three operands agrees within 1e-9."""
        left = np.array(
            [
                combine_dempster(combine_dempster(a, b), c).values
                for a, b, c in zip(*operands, strict=True)
            ]
        )
        right = np.array(
            [
                combine_dempster(a, combine_dempster(b, c)).values
                for a, b, c in zip(*operands, strict=True)
            ]
        )
        np.testing.assert_allclose(left, right, rtol=0, atol=1e-9)

    def test_vacuous_identity(self, operands: tuple[list[BeliefMass], ...]) -> None:
        """The vacuous mass is a two-sided identity."""
        vacuous = BeliefMass.vacuous()
        for m in operands[0]:
            assert combine_dempster(m, vacuous) == m
            assert combine_dempster(vacuous, m) == m

    def test_matches_set_intersections(self, operands: tuple[list[BeliefMass], ...]) -> None:
        """The channel table agrees with the 25-pair set expansion."""
        first, second, _ = operands
        combined = np.array(
            [combine_dempster(a, b).values for a, b in zip(first, second, strict=True)]
        )
        expected = np.array(
            [_dempster_by_sets(a, b) for a, b in zip(first, second, strict=True)]
        )
        np.testing.assert_allclose(combined, expected, rtol=0, atol=1e-12)


class TestCombineArrays:
    """Cell-wise combination over arrays."""

    @settings(max_examples=50)
    @given(st.lists(st.tuples(belief_masses(), belief_masses()), min_size=1, max_size=8))
    def test_bit_exact_with_scalar(self, pairs: list[tuple[BeliefMass, BeliefMass]]) -> None:
        """The array form reproduces the scalar form exactly."""
        m1 = np.array([a.values for a, _ in pairs])
        m2 = np.array([b.values for _, b in pairs])
        combined, conflicted = combine_dempster_arrays(m1, m2)
        assert not conflicted.any()
        for row, (a, b) in zip(combined, pairs, strict=True):
            assert tuple(row) == combine_dempster(a, b).values

    def test_conflicted_cells_keep_first_operand(self) -> None:
        """A totally conflicting cell is flagged and left unchanged."""
        m1 = np.array([[1.0, 0, 0, 0, 0], [0, 0, 0, 0, 1.0]])
        m2 = np.array([[0, 1.0, 0, 0, 0], [0, 1.0, 0, 0, 0]])
        combined, conflicted = combine_dempster_arrays(m1, m2)
        assert conflicted.tolist() == [True, False]
        np.testing.assert_array_equal(combined[0], m1[0])
        np.testing.assert_array_equal(combined[1], m2[1])

    def test_broadcasts(self, rng: np.random.Generator) -> None:
        """A single mass broadcasts over a grid."""
        grid = random_masses(rng, (3, 4))
        free = BeliefMass.from_mapping({Hypothesis.F: 0.1}).as_array()
        combined, _ = combine_dempster_arrays(grid, free)
        assert combined.shape == (3, 4, 5)


class TestSupports:
    """Closed forms of repeated simple supports."""

    def test_simple_support(self) -> None:
        """n supports of weight w leave (1 - w)^n on Θ."""
        masses = simple_support_masses(np.array([0, 1, 2]), 0.1, Hypothesis.F)
        np.testing.assert_allclose(masses[:, CHANNEL_INDEX[Hypothesis.F]], [0.0, 0.1, 0.19])
        np.testing.assert_allclose(masses[:, -1], [1.0, 0.9, 0.81])

    def test_simple_support_weight_domain(self) -> None:
        """A weight of 1 is not a simple support."""
        with pytest.raises(DomainError):
            simple_support_masses(np.array([1]), 1.0, Hypothesis.F)

    @pytest.mark.parametrize(("free", "static"), [(0, 0), (3, 0), (0, 4), (2, 5), (7, 1)])
    def test_free_static_matches_sequential(self, free: int, static: int) -> None:
        """The closed form equals depositing supports one at a time."""
        expected = BeliefMass.vacuous()
        for _ in range(free):
            expected = combine_dempster(expected, BeliefMass.from_mapping({Hypothesis.F: 0.1}))
        for _ in range(static):
            expected = combine_dempster(expected, BeliefMass.from_mapping({Hypothesis.O_S: 0.1}))
        closed = combine_free_static_supports(np.array(free), 0.1, np.array(static), 0.1)
        np.testing.assert_allclose(closed, expected.as_array(), rtol=0, atol=1e-12)

    def test_free_static_large_counts(self) -> None:
        """Thousands of deposits stay finite and normalised."""
        closed = combine_free_static_supports(
            np.array([5000, 0, 5000]), 0.1, np.array([5000, 5000, 4000]), 0.1
        )
        assert np.all(np.isfinite(closed))
        np.testing.assert_allclose(closed.sum(axis=-1), 1.0)
        assert closed[2, CHANNEL_INDEX[Hypothesis.F]] == pytest.approx(1.0)


class TestClassify:
    """Threshold classification."""

    @pytest.mark.parametrize(
        ("masses", "label"),
        [
            ({Hypothesis.F: 0.6}, CellLabel.F),
            ({Hypothesis.O_S: 0.7}, CellLabel.O_S),
            ({Hypothesis.O_D: 0.51}, CellLabel.O_D),
            ({Hypothesis.O_S: 0.3, Hypothesis.O_D: 0.3}, CellLabel.O_SD),
            ({Hypothesis.O_SD: 0.6}, CellLabel.O_SD),
            ({Hypothesis.F: 0.5}, CellLabel.UNKNOWN),
            ({}, CellLabel.UNKNOWN),
        ],
    )
    def test_examples(self, masses: dict[Hypothesis, float], label: CellLabel) -> None:
        """Labels at the default threshold; the comparison is strict."""
        assert classify_cell(BeliefMass.from_mapping(masses), 0.5) is label

    def test_tie_prefers_free(self) -> None:
        """Equal singletons above threshold resolve in F, O_s, O_d order."""
        m = BeliefMass((0.5, 0.5, 0.0, 0.0, 0.0))
        assert classify_cell(m, 0.4) is CellLabel.F

    @pytest.mark.parametrize("threshold", [0.0, -0.1, 1.5])
    def test_threshold_domain(self, threshold: float) -> None:
        """Thresholds outside (0, 1] are rejected."""
        with pytest.raises(DomainError):
            classify_cell(BeliefMass.vacuous(), threshold)
        with pytest.raises(DomainError):
            classify_masses(vacuous_masses((1,)), threshold)

    @pytest.mark.parametrize("threshold", [0.2, 0.5, 0.8])
    def test_array_matches_scalar(self, rng: np.random.Generator, threshold: float) -> None:
        """classify_masses agrees with classify_cell on every cell."""
        masses = random_masses(rng, (20, 20))
        masses[0, :5] = [0.4, 0.4, 0.0, 0.0, 0.2]
        codes = classify_masses(masses, threshold)
        for index in np.ndindex(codes.shape):
            expected = classify_cell(BeliefMass.from_array(masses[index]), threshold)
            assert LABEL_CODES[codes[index]] is expected
