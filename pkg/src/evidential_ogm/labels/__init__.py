"""Annotation-based label generation with observability masking."""

from evidential_ogm.labels.annotations import (
    AnnotatedSample,
    generate_label_from_annotations,
    points_in_box,
)
from evidential_ogm.labels.geometry import BevBox, footprint_mask, points_in_rotated_rect
from evidential_ogm.labels.occlusion import occlusion_mask

__all__ = [
    "AnnotatedSample",
    "BevBox",
    "footprint_mask",
    "generate_label_from_annotations",
    "occlusion_mask",
    "points_in_box",
    "points_in_rotated_rect",
]
