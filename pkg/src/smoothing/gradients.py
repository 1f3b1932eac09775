"""
DISCRETE GRADIENTS
==================
Central differences on the lattice and their dual norms.
"""

from typing import Optional

import numpy as np

from config import settings
from src.errors import DomainError
from src.metric import ScalarField
from src.smoothing.grid import GridDomain, stencil_lip
from src.verification import CheckLedger


def grad_field(v: ScalarField) -> np.ndarray:
    """(d, *shape) central differences; entries off the interior are 0"""
    domain = v.space
    if not isinstance(domain, GridDomain):
        raise DomainError("gradients need a field on a GridDomain")
    parts = np.gradient(v.values, *domain.h)
    if domain.d == 1:
        parts = [parts]
    grad = np.stack(parts, axis=0)
    return np.where(domain.interior[None, ...], grad, 0.0)


def dual_grad_field(v: ScalarField) -> ScalarField:
    """‖Dv‖_* at every interior node (masked elsewhere)"""
    domain: GridDomain = v.space
    grad = grad_field(v)
    values = domain.norm.dual_norm(np.moveaxis(grad, 0, -1))
    return ScalarField(domain, values, mask=domain.interior, name=f"|D{v.name}|_*")


def fact_check(v: ScalarField, K: float, tau: float = 0.0, tol: Optional[float] = None) -> CheckLedger:
    """
    Lattice form of "‖Dv‖_* <= K on Ω and lip(v, ∂Ω) <= K  ⇒  v is K-Lipschitz":
    records the interior gradient bound, the boundary constant and the
    measured mesh constant C with lip(v) <= K + tau + C h
    """
    tol = settings.TOLERANCE if tol is None else tol
    domain: GridDomain = v.space
    ledger = CheckLedger()
    grads = dual_grad_field(v)
    ledger.check_le("max ‖Dv‖_* on the interior", float(grads.values[domain.interior].max()), K + tau, tol)
    ledger.check_le("lip(v, boundary nodes)", stencil_lip(domain, v.values, mask=domain.boundary).value, K, tol)
    measured = stencil_lip(domain, v.values).value
    C = max(0.0, measured - K - tau) / domain.h_max
    ledger.check_le("mesh constant C of lip(v)", C, settings.MESH_CONSTANT_CAP, 0.0)
    return ledger
