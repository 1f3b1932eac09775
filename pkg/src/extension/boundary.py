"""
BOUNDARY-PRESERVING LOCAL STEP
==============================
Given a 1-Lipschitz u0 on E, mu-Lipschitz data u_mu on F with
|u_mu - u0| <= delta on F, and a slope lam in (mu, 1), build a
lam-Lipschitz u_lam on E with u_lam = u_mu on F and

    |u0 - u_lam| <= delta + eps(lam, mu, E, F)

u_lam is the largest lam-Lipschitz function below u0 + delta + eps that
agrees with u_mu on F. The step also recomputes its diagnostics:
- S: nodes where u_lam climbs to within eps/2 of the bound
- v: inf-convolution of u_lam re-anchored on F u S (must equal u_lam)
- G: nodes off F u S where v reaches the bound (must be empty)
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from config import settings
from src.errors import DomainError, PreconditionError
from src.extension.transforms import UpperBound, cone_envelope, constrained_max_lipschitz
from src.metric import MetricSpace, ScalarField, diameter, lip_constant, set_distance
from src.verification import CheckLedger, InequalityCheck


def epsilon_lambda(lam: float, mu: float, diam_EF: float, dist_EF: float, EF_empty: bool = False) -> float:
    """
    Certified error increment of one local step

        (1 - lam) / (lam - mu) * (lam + mu) * (diam(E\\F) + dist(E\\F, F))

    Returns 0 when E\\F is empty; otherwise the value is strictly positive.

    Raises:
        PreconditionError: E\\F is nonempty but diam + dist vanishes (a
            pseudometric that glues E\\F onto F)
    """
    if not 0.0 <= mu < lam < 1.0:
        raise DomainError(f"need 0 <= mu < lambda < 1, got mu={mu}, lambda={lam}")
    if EF_empty:
        return 0.0
    if diam_EF < 0 or dist_EF < 0:
        raise DomainError("diameter and distance must be nonnegative")
    span = diam_EF + dist_EF
    if not span > 0.0:
        check = InequalityCheck("-(diam(E\\F) + dist(E\\F, F))", -span, -np.finfo(float).tiny, 0.0)
        raise PreconditionError(check, "E\\F must be separated from F")
    return float((1.0 - lam) / (lam - mu) * (lam + mu) * span)


# ============================================
# INPUT / RESULT
# ============================================

@dataclass
class LocalStepInput:
    """
    Data of one local step on the finite space E
    """

    space: MetricSpace
    F: np.ndarray
    u0: ScalarField
    u_mu: np.ndarray  # values aligned with F
    mu: float
    delta: float
    lam: float

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=int).ravel()
        self.u_mu = np.asarray(self.u_mu, dtype=float).ravel()
        if self.F.size == 0:
            raise DomainError("local step needs a nonempty F")
        if self.u_mu.size != self.F.size:
            raise DomainError(f"{self.u_mu.size} values of u_mu for {self.F.size} points of F")
        if not self.u0.is_total:
            raise DomainError("u0 must be defined on all of E")
        if self.delta < 0:
            raise DomainError(f"delta must be nonnegative, got {self.delta}")
        if not 0.0 <= self.mu < 1.0:
            raise DomainError(f"mu must lie in [0, 1), got {self.mu}")
        if not self.mu < self.lam < 1.0:
            raise DomainError(f"lambda must lie in (mu, 1) = ({self.mu}, 1), got {self.lam}")

    @property
    def outside(self) -> np.ndarray:
        """E \\ F"""
        mask = np.ones(self.space.n, dtype=bool)
        mask[self.F] = False
        return np.flatnonzero(mask)

    def check_preconditions(self, tol: Optional[float] = None, n_jobs: Optional[int] = None) -> float:
        """
        Verify lip(u0, E) <= 1, lip(u_mu, F) <= mu and |u_mu - u0| <= delta on F

        Returns:
            the slope mu actually used (inflated to the measured value when the
            data exceed mu by rounding only)
        """
        tol = settings.TOLERANCE if tol is None else tol
        lip_u0 = lip_constant(self.u0, n_jobs=n_jobs).value
        check = InequalityCheck("lip(u0, E)", lip_u0, 1.0, tol)
        if not check.passed:
            raise PreconditionError(check, "u0 must be 1-Lipschitz")

        data = ScalarField.on_subset(self.space, self.F, self.u_mu, name="u_mu")
        lip_mu = lip_constant(data, self.F, n_jobs=n_jobs).value
        mu = self.mu
        if lip_mu > mu:
            allowance = mu * (1.0 + settings.MU_INFLATION_RTOL) + settings.MU_INFLATION_ATOL
            if lip_mu > allowance:
                raise PreconditionError(InequalityCheck("lip(u_mu, F)", lip_mu, mu, 0.0), "u_mu must be mu-Lipschitz")
            logger.debug(f"📊 mu inflated from {mu:.17g} to measured {lip_mu:.17g}")
            mu = lip_mu
            if mu >= self.lam:
                raise DomainError(f"inflated mu {mu:.17g} is not below lambda {self.lam:.17g}")

        gap = float(np.max(np.abs(self.u_mu - self.u0.at(self.F))))
        check = InequalityCheck("max |u_mu - u0| on F", gap, self.delta, tol)
        if not check.passed:
            raise PreconditionError(check, "u_mu must stay within delta of u0 on F")
        return mu


@dataclass
class LocalStepResult:
    u_lambda: ScalarField
    eps_lambda: float
    S_lambda: np.ndarray
    G_lambda: np.ndarray
    certified_bound: float
    mu_used: float
    ledger: CheckLedger = field(default_factory=CheckLedger)


# ============================================
# LOCAL STEP
# ============================================

def local_step(step: LocalStepInput, tol: Optional[float] = None, n_jobs: Optional[int] = None) -> LocalStepResult:
    """
    Run one boundary-preserving local step

    Args:
        step: validated input data
        tol: absolute tolerance of every certified inequality

    Returns:
        LocalStepResult whose ledger holds every certified inequality

    Raises:
        PreconditionError: input invariants fail (run refused)
        InvariantViolation: a certified inequality fails on the output
    """
    tol = settings.TOLERANCE if tol is None else tol
    space = step.space
    mu = step.check_preconditions(tol=tol, n_jobs=n_jobs)
    outside = step.outside
    u0 = step.u0.flat

    if outside.size == 0:
        u = u0.copy()
        u[step.F] = step.u_mu
        eps = 0.0
        ledger = CheckLedger()
        ledger.check_le("max |u0 - u_lambda|", float(np.max(np.abs(u0 - u))), step.delta, tol)
        ledger.require()
        empty = np.zeros(0, dtype=int)
        return LocalStepResult(
            u_lambda=ScalarField(space, u, name="u_lambda"),
            eps_lambda=0.0,
            S_lambda=empty,
            G_lambda=empty,
            certified_bound=step.delta,
            mu_used=mu,
            ledger=ledger,
        )

    eps = epsilon_lambda(
        step.lam,
        mu,
        diameter(space, outside),
        set_distance(space, outside, step.F),
    )
    bound = u0 + step.delta + eps
    u = constrained_max_lipschitz(
        space, step.F, step.u_mu, UpperBound.everywhere(bound), step.lam, tol=tol, n_jobs=n_jobs
    ).flat

    S = np.flatnonzero(u >= u0 + step.delta + eps / 2.0)
    anchors = np.union1d(step.F, S)
    v = cone_envelope(space, anchors, u[anchors], step.lam, upper=True, n_jobs=n_jobs)
    candidates = np.ones(space.n, dtype=bool)
    candidates[anchors] = False
    G = np.flatnonzero(candidates & (v >= bound))

    result_field = ScalarField(space, u, name="u_lambda")
    ledger = CheckLedger()
    ledger.check_le("lip(u_lambda, E)", lip_constant(result_field, n_jobs=n_jobs).value, step.lam, tol)
    ledger.check_le("max |u_lambda - u_mu| on F", float(np.max(np.abs(u[step.F] - step.u_mu))), 0.0, 0.0)
    ledger.check_le("max |u0 - u_lambda|", float(np.max(np.abs(u0 - u))), step.delta + eps, tol)
    ledger.check_le("|G_lambda|", float(G.size), 0.0, 0.0)
    ledger.check_le("max |u_lambda - v_lambda|", float(np.max(np.abs(u - v))), 0.0, tol)
    ledger.require()

    logger.debug(
        f"📊 Local step: |E|={space.n}, |F|={step.F.size}, lambda={step.lam:.6g}, "
        f"eps={eps:.6g}, |S|={S.size}"
    )
    return LocalStepResult(
        u_lambda=result_field,
        eps_lambda=eps,
        S_lambda=S,
        G_lambda=G,
        certified_bound=step.delta + eps,
        mu_used=mu,
        ledger=ledger,
    )


def in_constraint_family(
    u: np.ndarray,
    step: LocalStepInput,
    eps: float,
    tol: Optional[float] = None,
) -> bool:
    """Membership in the family: lam-Lipschitz, u = u_mu on F, u <= u0 + delta + eps"""
    tol = settings.TOLERANCE if tol is None else tol
    u = np.asarray(u, dtype=float).ravel()
    lip = lip_constant(ScalarField(step.space, u)).value
    return bool(
        lip <= step.lam + tol
        and np.max(np.abs(u[step.F] - step.u_mu)) <= tol
        and np.all(u <= step.u0.flat + step.delta + eps + tol)
    )


def subset_positions(container: Sequence[int], members: Sequence[int]) -> np.ndarray:
    """Positions of members inside the sorted index array container"""
    container = np.asarray(container, dtype=int)
    members = np.asarray(members, dtype=int)
    positions = np.searchsorted(container, members)
    if np.any(positions >= container.size) or np.any(container[np.minimum(positions, container.size - 1)] != members):
        raise DomainError("members are not contained in the index set")
    return positions
