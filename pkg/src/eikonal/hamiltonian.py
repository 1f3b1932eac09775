"""
EIKONAL HAMILTONIAN
===================
F(x, x*) = ‖x* + Dv(x)‖_* - 1 for a smooth base field v, and the two
hypotheses the construction needs:

(A) F(x, 0) <= 0, i.e. ‖Dv‖_* <= 1 at every interior node
(B) F(x, x*) >= 1 whenever ‖x*‖_* = 3 (reported as a measured margin)
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from config import settings
from src.errors import HypothesisViolation
from src.metric import NormContext, NormTag, ScalarField
from src.smoothing.gradients import grad_field
from src.smoothing.grid import GridDomain
from src.verification import CheckLedger


def hamiltonian_residual(x_star: np.ndarray, v_grad: np.ndarray, norm: "NormContext | str | NormTag" = NormTag.L2) -> np.ndarray:
    """‖x_star + v_grad‖_* - 1 (broadcast over leading axes)"""
    if not isinstance(norm, NormContext):
        norm = NormContext(norm)
    total = np.asarray(x_star, dtype=float) + np.asarray(v_grad, dtype=float)
    value = norm.dual_norm(total) - 1.0
    return float(value) if np.ndim(value) == 0 else value


@dataclass
class HypothesisReport:
    slack_A: float  # 1 - max ‖Dv‖_*
    worst_node: Tuple[int, ...]
    margin_B: float  # min F(x, x*) over sampled ‖x*‖_* = 3
    ledger: CheckLedger = field(default_factory=CheckLedger)

    def as_record(self) -> dict:
        return {"slack_A": self.slack_A, "worst_node": list(self.worst_node), "margin_B": self.margin_B}


def check_hypotheses(
    v: ScalarField,
    n_directions: int = 64,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
) -> HypothesisReport:
    """
    Check (A) at every interior node and measure the (B) margin

    Raises:
        HypothesisViolation: (A) fails; names the worst node
    """
    tol = settings.TOLERANCE if tol is None else tol
    rng = rng or np.random.default_rng(settings.SEED)
    domain: GridDomain = v.space
    grads = np.moveaxis(grad_field(v), 0, -1)
    duals = np.where(domain.interior, domain.norm.dual_norm(grads), -np.inf)
    flat = int(np.argmax(duals))
    worst_node = tuple(int(i) for i in np.unravel_index(flat, domain.shape))
    worst = float(duals.ravel()[flat])

    ledger = CheckLedger()
    check = ledger.check_le("(A) max ‖Dv‖_* on the interior", worst, 1.0, tol)
    if not check.passed:
        raise HypothesisViolation(check, worst_node)

    directions = 3.0 * NormContext(domain.norm.q).unit_directions(domain.d, n_directions, rng)
    interior_grads = grads[domain.interior]
    margin = np.inf
    for x_star in directions:
        margin = min(margin, float(np.min(hamiltonian_residual(x_star[None, :], interior_grads, domain.norm))))
    ledger.check_le("(B) 1 - min F(x, x*) over ‖x*‖_* = 3", 1.0 - margin, 0.0, tol)

    logger.debug(f"📊 Hypotheses: slack (A) = {1.0 - worst:.6g}, margin (B) = {margin:.6g}")
    return HypothesisReport(slack_A=1.0 - worst, worst_node=worst_node, margin_B=margin, ledger=ledger)
