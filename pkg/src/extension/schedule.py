"""
EXHAUSTION SCHEDULE
===================
Nested stage sets E_n = (E n B(p, n * ball_step)) u F and increasing
slopes lambda_n (in units of K) such that stage n's certified increment
stays within its budget eps / 2^n:

    (1 - l_n)(l_n + l_{n-1}) / (l_n - l_{n-1}) * D_n <= eps / (K 2^n)

with D_n = diam(E_n \\ E_{n-1}) + dist(E_n \\ E_{n-1}, E_{n-1}).
The left side is strictly decreasing in l_n, so each slope is found by
bisection.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import bisect

from config import settings
from src.errors import DomainError, PreconditionError, ScheduleError
from src.metric import MetricSpace, ScalarField, diameter, lip_constant, set_distance
from src.verification import CheckLedger, InequalityCheck


def stage_function(lam: float, lam_prev: float, D: float) -> float:
    """(1 - lam)(lam + lam_prev) / (lam - lam_prev) * D"""
    return (1.0 - lam) * (lam + lam_prev) / (lam - lam_prev) * D


@dataclass
class ScheduleStage:
    n: int
    indices: np.ndarray  # E_n (sorted)
    previous: np.ndarray  # F_n = E_{n-1} (sorted)
    radius: float
    lam: float  # normalized slope (units of K)
    lam_prev: float
    D: float
    budget: float  # normalized budget eps / (K 2^n)
    stage_value: float  # stage_function at lam

    @property
    def new_points(self) -> int:
        return int(self.indices.size - self.previous.size)


@dataclass
class Schedule:
    """
    Stages of the exhaustion; slopes are stored normalized by K
    """

    p: int
    K: float
    eps: float
    lambda0: float
    ball_step: float
    stages: List[ScheduleStage] = field(default_factory=list)
    ledger: CheckLedger = field(default_factory=CheckLedger)

    @property
    def lambda_n(self) -> np.ndarray:
        """Slopes in the units of u0 (lambda0 first)"""
        return self.K * np.array([self.lambda0] + [stage.lam for stage in self.stages])

    @property
    def budgets(self) -> np.ndarray:
        """Per-stage budgets eps / 2^n in the units of u0"""
        return self.K * np.array([stage.budget for stage in self.stages])

    @property
    def E_n(self) -> List[np.ndarray]:
        return [stage.indices for stage in self.stages]

    def __len__(self) -> int:
        return len(self.stages)


def _stage_span(space: MetricSpace, current: np.ndarray, previous: np.ndarray) -> float:
    """diam(E_n \\ E_{n-1}) + dist(E_n \\ E_{n-1}, E_{n-1})"""
    added = np.setdiff1d(current, previous, assume_unique=True)
    return diameter(space, added) + set_distance(space, added, previous)


def _stage_slope(lam_prev: float, D: float, target: float, check_name: str, ledger: CheckLedger) -> Tuple[float, float]:
    """Smallest admissible slope in (lam_prev, 1) and its stage value"""
    lo = lam_prev + settings.SCHEDULE_MIN_GAP
    if lo >= 1.0:
        raise ScheduleError(f"no room for a slope above {lam_prev:.17g} below 1")
    if D <= 0.0 or stage_function(lo, lam_prev, D) <= target:
        return lo, stage_function(lo, lam_prev, D)

    trace: List[Tuple[float, float]] = []

    def residual(lam: float) -> float:
        value = stage_function(lam, lam_prev, D)
        trace.append((lam, value))
        return value - target

    root = bisect(residual, lo, 1.0, xtol=settings.BISECTION_XTOL)
    lam = max(root + settings.SCHEDULE_NUDGE, lo)
    while stage_function(lam, lam_prev, D) > target and lam < 1.0:
        lam += settings.SCHEDULE_NUDGE

    trace.sort()
    increases = [b[1] - a[1] for a, b in zip(trace, trace[1:]) if b[0] > a[0]]
    ledger.check_le(f"{check_name}: max increase along bisection trace", max(increases, default=0.0), 0.0, settings.TOLERANCE)
    return lam, stage_function(lam, lam_prev, D)


def build_schedule(
    space: MetricSpace,
    F: Sequence[int],
    u0: ScalarField,
    K: float,
    eps: float,
    ball_step: Optional[float] = None,
    base_point: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> Schedule:
    """
    Build the exhaustion schedule

    Args:
        space: the finite set E
        F: constraint set (nonempty)
        u0: field on E
        K: Lipschitz normalization (lip(u0, F) must be strictly smaller)
        eps: total error budget
        ball_step: radius increment (default diam(E) / 8)
        base_point: p in F (default the first index of F)

    Returns:
        Schedule with E_N = E

    Raises:
        PreconditionError: lip(u0, F) >= K
        ScheduleError: a slope cannot be placed below K
    """
    F = np.unique(np.asarray(F, dtype=int))
    if F.size == 0:
        raise DomainError("schedule needs a nonempty F")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not K > 0:
        raise DomainError(f"K must be positive, got {K}")

    lam0 = lip_constant(u0, F, n_jobs=n_jobs).value / K
    check = InequalityCheck("lip(u0, F) / K", lam0, 1.0, 0.0)
    if lam0 >= 1.0:
        raise PreconditionError(check, "boundary constant not strictly smaller than K")

    p = int(F[0]) if base_point is None else int(base_point)
    if p not in set(F.tolist()):
        raise DomainError(f"base point {p} is not in F")
    if ball_step is None:
        ball_step = diameter(space, space.all_indices) / 8.0
    if not ball_step > 0:
        # every point coincides with p
        ball_step = 1.0

    schedule = Schedule(p=p, K=float(K), eps=float(eps), lambda0=lam0, ball_step=float(ball_step))
    from_p = space.distances([p], space.all_indices)[0]
    in_F = np.zeros(space.n, dtype=bool)
    in_F[F] = True

    previous = F
    lam_prev = lam0
    radius_step = 0
    while previous.size < space.n:
        radius_step += 1
        radius = radius_step * ball_step
        current = np.flatnonzero((from_p <= radius) | in_F)
        if radius >= from_p.max():
            current = space.all_indices
        if current.size == previous.size:
            continue

        n = len(schedule.stages) + 1
        budget = eps / (K * 2.0 ** n)
        trace_checks = CheckLedger()
        D = _stage_span(space, current, previous)
        lam, value = _stage_slope(lam_prev, D, budget, f"stage {n}", trace_checks)
        if 1.0 - lam < settings.SCHEDULE_HEADROOM_FLOOR and current.size < space.n:
            # the slopes would reach 1 within a few more stages
            logger.debug(f"📊 Stage {n}: headroom {1.0 - lam:.3e} below floor, closing the exhaustion")
            current = space.all_indices
            trace_checks = CheckLedger()
            D = _stage_span(space, current, previous)
            lam, value = _stage_slope(lam_prev, D, budget, f"stage {n}", trace_checks)
        schedule.ledger.extend(trace_checks)
        if not lam < 1.0:
            raise ScheduleError(f"stage {n} slope {lam:.17g} is not below K")

        schedule.ledger.check_le(f"stage {n}: budget inequality", value, budget, settings.SCHEDULE_SLACK)
        schedule.ledger.check_le(f"stage {n}: lambda_{n - 1} - lambda_{n}", lam_prev - lam, 0.0, 0.0)
        schedule.stages.append(
            ScheduleStage(
                n=n,
                indices=current,
                previous=previous,
                radius=float(radius),
                lam=float(lam),
                lam_prev=float(lam_prev),
                D=float(D),
                budget=float(budget),
                stage_value=float(value),
            )
        )
        logger.debug(f"📊 Stage {n}: |E_n|={current.size}, D={D:.6g}, lambda={lam:.12g}")
        previous = current
        lam_prev = lam

    schedule.ledger.check_le(
        "sum of stage budgets / eps",
        float(sum(stage.budget for stage in schedule.stages)) * K / eps,
        1.0,
        0.0,
    )
    schedule.ledger.require()
    logger.info(f"✅ Schedule built: {len(schedule)} stages, lambda_N = {schedule.lambda_n[-1]:.12g}")
    return schedule
