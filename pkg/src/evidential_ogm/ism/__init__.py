"""Geometric inverse sensor model baseline."""

from evidential_ogm.config import IsmConfig
from evidential_ogm.ism.geometric import geometric_ism, ism_counts

__all__ = ["IsmConfig", "geometric_ism", "ism_counts"]
