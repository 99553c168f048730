"""Belief-mass and subjective-logic algebra over ``{F, O_s, O_d}``."""

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
from evidential_ogm.evidence.opinion import (
    DirichletEvidence,
    SubjectiveOpinion,
    evidence_to_masses,
    evidence_to_opinion,
    opinion_to_mass,
)

__all__ = [
    "CHANNEL_INDEX",
    "LABEL_CODES",
    "BeliefMass",
    "DirichletEvidence",
    "SubjectiveOpinion",
    "classify_cell",
    "classify_masses",
    "combine_dempster",
    "combine_dempster_arrays",
    "combine_free_static_supports",
    "evidence_to_masses",
    "evidence_to_opinion",
    "opinion_to_mass",
    "simple_support_masses",
    "vacuous_masses",
]
