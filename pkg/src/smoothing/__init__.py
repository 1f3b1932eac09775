"""
Grid smoothing: mollifiers, envelopes, flattening, tolerance shaping
"""
from .grid import GridDomain, LatticeLipschitz, stencil_lip
from .kernels import Kernel, VariableMollifyResult, gradient_audit, mollify, radius_levels, variable_mollify
from .envelopes import (
    EnvelopeParams,
    LocalAudit,
    envelope_checks,
    lasry_lions,
    lasry_lions_bound,
    local_lipschitz_audit,
    moreau_inf,
    moreau_sup,
)
from .gradients import dual_grad_field, fact_check, grad_field
from .shaping import (
    ShapedTolerance,
    SmoothingResult,
    flatten,
    homogeneous_smoothing,
    smooth_below_constant,
    tolerance_shape,
)
from .grid_io import read_grid, write_grid

__all__ = [
    "GridDomain",
    "LatticeLipschitz",
    "stencil_lip",
    "Kernel",
    "VariableMollifyResult",
    "gradient_audit",
    "mollify",
    "radius_levels",
    "variable_mollify",
    "EnvelopeParams",
    "LocalAudit",
    "envelope_checks",
    "lasry_lions",
    "lasry_lions_bound",
    "local_lipschitz_audit",
    "moreau_inf",
    "moreau_sup",
    "dual_grad_field",
    "fact_check",
    "grad_field",
    "ShapedTolerance",
    "SmoothingResult",
    "flatten",
    "homogeneous_smoothing",
    "smooth_below_constant",
    "tolerance_shape",
    "read_grid",
    "write_grid",
]
