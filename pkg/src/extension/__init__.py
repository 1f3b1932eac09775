"""
Lipschitz extensions and boundary-preserving approximation
"""
from .transforms import (
    ExtensionProblem,
    UpperBound,
    cone_envelope,
    constrained_max_lipschitz,
    inf_convolution,
    midpoint_extension,
    random_feasible_extensions,
    sup_convolution,
)
from .boundary import LocalStepInput, LocalStepResult, epsilon_lambda, in_constraint_family, local_step
from .schedule import Schedule, ScheduleStage, build_schedule, stage_function
from .approximation import GlobalApproxResult, StageRecord, global_approx

__all__ = [
    "ExtensionProblem",
    "UpperBound",
    "cone_envelope",
    "constrained_max_lipschitz",
    "inf_convolution",
    "midpoint_extension",
    "random_feasible_extensions",
    "sup_convolution",
    "LocalStepInput",
    "LocalStepResult",
    "epsilon_lambda",
    "in_constraint_family",
    "local_step",
    "Schedule",
    "ScheduleStage",
    "build_schedule",
    "stage_function",
    "GlobalApproxResult",
    "StageRecord",
    "global_approx",
]
