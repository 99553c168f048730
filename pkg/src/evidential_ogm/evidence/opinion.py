"""Dirichlet evidence and subjective opinions over the three cell states."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from evidential_ogm.constants import MASS_CHANNELS, MASS_SUM_TOLERANCE, CellState
from evidential_ogm.errors import DomainError
from evidential_ogm.evidence.mass import BeliefMass

if TYPE_CHECKING:
    from numpy.typing import NDArray

__all__ = [
    "CLASS_COUNT",
    "DirichletEvidence",
    "SubjectiveOpinion",
    "evidence_to_masses",
    "evidence_to_opinion",
    "opinion_to_mass",
]

CLASS_COUNT = len(CellState)


@dataclass(frozen=True, slots=True)
class DirichletEvidence:
    """Non-negative evidence ``e_A`` per cell state, ordered ``F, O_s, O_d``."""

    evidence: tuple[float, float, float]

    def __post_init__(self) -> None:
        if len(self.evidence) != CLASS_COUNT:
            msg = f"expected {CLASS_COUNT} evidence values, got {len(self.evidence)}"
            raise DomainError(msg)
        for state, value in zip(CellState, self.evidence, strict=True):
            if not value >= 0.0:
                msg = f"evidence for {state.value} must be >= 0, got {value!r}"
                raise DomainError(msg)

    @classmethod
    def from_mapping(cls, evidence: Mapping[CellState, float]) -> DirichletEvidence:
        """Build from a mapping; missing states carry no evidence."""
        return cls(tuple(float(evidence.get(s, 0.0)) for s in CellState))  # type: ignore[arg-type]

    @property
    def class_count(self) -> int:
        """Number of classes ``K``."""
        return CLASS_COUNT

    @property
    def alpha(self) -> tuple[float, float, float]:
        """Dirichlet parameters ``α_A = e_A + 1``."""
        return tuple(e + 1.0 for e in self.evidence)  # type: ignore[return-value]

    @property
    def strength(self) -> float:
        """Dirichlet strength ``S = Σ α_A``."""
        return sum(self.alpha)


@dataclass(frozen=True, slots=True)
class SubjectiveOpinion:
    """Belief per cell state plus uncertainty, ``Σ b_A + u = 1``."""

    belief: tuple[float, float, float]
    uncertainty: float

    def __post_init__(self) -> None:
        values = (*self.belief, self.uncertainty)
        if any(not -MASS_SUM_TOLERANCE <= v <= 1.0 + MASS_SUM_TOLERANCE for v in values):
            msg = f"opinion components must lie in [0, 1]: {values!r}"
            raise DomainError(msg)
        if abs(sum(values) - 1.0) > MASS_SUM_TOLERANCE:
            msg = f"beliefs and uncertainty must sum to 1, got {sum(values)!r}"
            raise DomainError(msg)

    def __getitem__(self, state: CellState) -> float:
        return self.belief[list(CellState).index(state)]

    @property
    def projected_probability(self) -> tuple[float, float, float]:
        """``p_A = b_A + u / K`` with a uniform base rate."""
        share = self.uncertainty / CLASS_COUNT
        return tuple(b + share for b in self.belief)  # type: ignore[return-value]

    @property
    def dissonance(self) -> float:
        """Belief dissonance, high when evidence supports several states equally.

        ``Σ_i b_i (Σ_{j≠i} b_j Bal(b_j, b_i)) / (Σ_{j≠i} b_j)`` with
        ``Bal(a, b) = 1 - |a - b| / (a + b)``. Terms with an empty denominator
        contribute zero.
        """
        total = 0.0
        for i, b_i in enumerate(self.belief):
            weighted = 0.0
            others = 0.0
            for j, b_j in enumerate(self.belief):
                if i == j:
                    continue
                others += b_j
                if b_i + b_j > 0.0:
                    weighted += b_j * (1.0 - abs(b_i - b_j) / (b_i + b_j))
            if others > 0.0:
                total += b_i * weighted / others
        return total


def evidence_to_opinion(e: DirichletEvidence) -> SubjectiveOpinion:
    """Convert Dirichlet evidence to a subjective opinion.

    ``α_A = e_A + 1``, ``S = Σ α_A``, ``b_A = e_A / S`` and ``u = K / S``.

    Examples
    --------
    >>> evidence_to_opinion(DirichletEvidence((3.0, 0.0, 0.0)))
    SubjectiveOpinion(belief=(0.5, 0.0, 0.0), uncertainty=0.5)
    """
    strength = e.strength
    return SubjectiveOpinion(
        belief=tuple(v / strength for v in e.evidence),  # type: ignore[arg-type]
        uncertainty=e.class_count / strength,
    )


def opinion_to_mass(o: SubjectiveOpinion) -> BeliefMass:
    """Read an opinion as a belief mass: ``m({A}) = b_A`` and ``m(Θ) = u``."""
    b_free, b_static, b_dynamic = o.belief
    return BeliefMass((b_free, b_static, b_dynamic, 0.0, o.uncertainty))


def evidence_to_masses(evidence: NDArray[np.floating]) -> NDArray[np.float64]:
    """Array form of ``opinion_to_mass(evidence_to_opinion(e))``.

    Parameters
    ----------
    evidence : ndarray
        ``(..., 3)`` evidence in ``F, O_s, O_d`` order, e.g. the raw output of
        an evidential prediction head.

    Returns
    -------
    ndarray
        ``(..., 5)`` masses in channel order.
    """
    evidence = np.asarray(evidence, dtype=np.float64)
    if evidence.shape[-1:] != (CLASS_COUNT,):
        msg = f"evidence must have a trailing axis of {CLASS_COUNT}, got {evidence.shape}"
        raise DomainError(msg)
    if not np.all(np.isfinite(evidence) & (evidence >= 0.0)):
        msg = "evidence must be non-negative and finite"
        raise DomainError(msg)
    strength = np.sum(evidence + 1.0, axis=-1)
    masses = np.zeros((*evidence.shape[:-1], len(MASS_CHANNELS)), dtype=np.float64)
    masses[..., :CLASS_COUNT] = evidence / strength[..., None]
    masses[..., -1] = CLASS_COUNT / strength
    return masses
