"""
Limiting-case analysis: the ℓ1-disc obstruction and its ℓ∞ image
"""
from .limiting_case import (
    CaseResult,
    axis_samples,
    circle_samples,
    image_inverse,
    image_map,
    l1_disc_case,
    linf_image_case,
    one_sided_slopes,
    write_axis_profile,
)

__all__ = [
    "CaseResult",
    "axis_samples",
    "circle_samples",
    "image_inverse",
    "image_map",
    "l1_disc_case",
    "linf_image_case",
    "one_sided_slopes",
    "write_axis_profile",
]
