"""
Finite metric spaces, norms and Lipschitz constants
"""
from .metric_space import MetricSpace, NormContext, NormTag, map_row_blocks
from .fields import ScalarField
from .lipschitz import (
    LipschitzEstimate,
    SetMetrics,
    diameter,
    dist_to_set,
    dist_to_set_many,
    lip_constant,
    set_distance,
    set_metrics,
)

__all__ = [
    "MetricSpace",
    "NormContext",
    "NormTag",
    "ScalarField",
    "LipschitzEstimate",
    "SetMetrics",
    "diameter",
    "dist_to_set",
    "dist_to_set_many",
    "lip_constant",
    "map_row_blocks",
    "set_distance",
    "set_metrics",
]
