"""
GLOBAL BOUNDARY-PRESERVING APPROXIMATION
========================================
Runs the local step stage by stage along an exhaustion schedule:
stage n extends the stage n-1 result from E_{n-1} to E_n with slope
lambda_n and error increment at most eps / 2^n, so the final u satisfies

- u = u0 on F exactly
- |u - u0| <= eps on E
- lip(u, E_n) <= lambda_n < K for every stage set
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from config import settings
from src.errors import DomainError, PreconditionError
from src.extension.boundary import LocalStepInput, local_step, subset_positions
from src.extension.schedule import Schedule, build_schedule
from src.metric import MetricSpace, ScalarField, lip_constant
from src.verification import CheckLedger, InequalityCheck


@dataclass
class StageRecord:
    """One row of the stage table (slopes and errors in the units of u0)"""

    n: int
    size: int
    new_points: int
    lam: float
    eps_used: float
    budget: float
    measured_lip: float
    sup_error: float

    def as_record(self) -> dict:
        return {
            "n": self.n,
            "size": self.size,
            "new_points": self.new_points,
            "lambda_n": self.lam,
            "eps_used": self.eps_used,
            "budget": self.budget,
            "measured_lip": self.measured_lip,
            "sup_error": self.sup_error,
        }


@dataclass
class GlobalApproxResult:
    u: ScalarField
    schedule: Schedule
    stages: List[StageRecord] = field(default_factory=list)
    ledger: CheckLedger = field(default_factory=CheckLedger)

    @property
    def sup_error(self) -> float:
        return max((stage.sup_error for stage in self.stages), default=0.0)


def global_approx(
    space: MetricSpace,
    F: Sequence[int],
    u0: ScalarField,
    eps: float,
    K: Optional[float] = None,
    ball_step: Optional[float] = None,
    base_point: Optional[int] = None,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> GlobalApproxResult:
    """
    Approximate u0 within eps by a function with constant strictly below K
    on every stage set, keeping u0 on F

    Args:
        space: finite set E
        F: constraint set
        u0: field on E
        eps: total error budget (> 0)
        K: Lipschitz normalization (default: measured lip(u0, E))
        ball_step: schedule radius increment (default diam(E) / 8)
        base_point: schedule base point in F (default the first index of F)

    Returns:
        GlobalApproxResult with the stage table and every certified check
    """
    tol = settings.TOLERANCE if tol is None else tol
    F = np.unique(np.asarray(F, dtype=int))
    if not u0.is_total:
        raise DomainError("u0 must be defined on all of E")

    lip_u0 = lip_constant(u0, n_jobs=n_jobs).value
    if K is None:
        K = lip_u0
    if not K > 0:
        raise DomainError(f"K must be positive (u0 is constant on E?), got {K}")
    check = InequalityCheck("lip(u0, E)", lip_u0, K, tol)
    if not check.passed:
        raise PreconditionError(check, "K must bound the Lipschitz constant of u0")

    schedule = build_schedule(space, F, u0, K, eps, ball_step=ball_step, base_point=base_point, n_jobs=n_jobs)
    normalized = u0.flat / K

    u = normalized.copy()
    delta = 0.0
    mu = schedule.lambda0
    ledger = CheckLedger()
    ledger.extend(schedule.ledger, prefix="schedule: ")
    stage_steps = []

    for stage in schedule.stages:
        subspace = space.subspace(stage.indices)
        previous_positions = subset_positions(stage.indices, stage.previous)
        step = LocalStepInput(
            space=subspace,
            F=previous_positions,
            u0=ScalarField(subspace, normalized[stage.indices], name="u0"),
            u_mu=u[stage.previous],
            mu=mu,
            delta=delta,
            lam=stage.lam,
        )
        result = local_step(step, tol=tol, n_jobs=n_jobs)
        u[stage.indices] = result.u_lambda.flat
        ledger.extend(result.ledger, prefix=f"stage {stage.n}: ")
        ledger.check_le(f"stage {stage.n}: eps used <= budget", result.eps_lambda, stage.budget, settings.SCHEDULE_SLACK)
        stage_steps.append(result.eps_lambda)
        delta = result.certified_bound
        mu = stage.lam

    values = u * K
    values[F] = u0.flat[F]
    u_field = ScalarField(space, values, name="u")

    records: List[StageRecord] = []
    for stage, eps_used in zip(schedule.stages, stage_steps):
        measured = lip_constant(u_field, stage.indices, n_jobs=n_jobs).value
        sup_error = float(np.max(np.abs(values[stage.indices] - u0.flat[stage.indices])))
        ledger.check_le(f"lip(u, E_{stage.n})", measured, stage.lam * K, tol)
        ledger.check_true(f"lambda_{stage.n} < K", stage.lam < 1.0)
        records.append(
            StageRecord(
                n=stage.n,
                size=int(stage.indices.size),
                new_points=stage.new_points,
                lam=float(stage.lam * K),
                eps_used=float(eps_used * K),
                budget=float(stage.budget * K),
                measured_lip=measured,
                sup_error=sup_error,
            )
        )

    ledger.check_le("max |u - u0| on F", float(np.max(np.abs(values[F] - u0.flat[F]))), 0.0, 0.0)
    ledger.check_le("max |u - u0| on E", float(np.max(np.abs(values - u0.flat))), eps, tol)
    ledger.check_le("sum of certified increments", float(delta * K), eps, tol)
    ledger.require()

    logger.info(
        f"✅ Global approximation: {len(records)} stages, sup error "
        f"{float(np.max(np.abs(values - u0.flat))):.6g} <= {eps:.6g}"
    )
    return GlobalApproxResult(u=u_field, schedule=schedule, stages=records, ledger=ledger)
