"""
ALMOST-CLASSICAL EIKONAL SOLUTIONS
==================================
Pipeline for boundary data u0 with constant strictly below 1 on a 2-D
square-lattice domain Ω:

1. Base field: midpoint extension of the boundary data (or, for data on
   all of Ω̄, the global approximation with K = 1 and budget eps/4)
2. Smooth: variable mollification with radius eps/2, clamped at ∂Ω
3. Check the hypotheses on the smooth field v
4. Decompose Ω into cells of diameter <= eps, refine cells where Dv
   oscillates, build the sawtooth correction per cell
5. w = v + Σ u_j, w = u0 on ∂Ω; residual = interior nodes off the level set
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from config import settings
from src.eikonal.cells import Cell, CellDecomposition, decompose
from src.eikonal.hamiltonian import HypothesisReport, check_hypotheses, hamiltonian_residual
from src.eikonal.sawtooth import PLATEAU, CellSawtooth, cell_sawtooth
from src.errors import CellRefinementError, DomainError, PreconditionError
from src.extension import ExtensionProblem, global_approx, midpoint_extension
from src.metric import ScalarField, lip_constant
from src.smoothing.gradients import grad_field
from src.smoothing.grid import GridDomain, stencil_lip
from src.smoothing.kernels import variable_mollify
from src.verification import CheckLedger, InequalityCheck

# cells refine while the oscillation of Dv exceeds this share of 1 - ‖p‖_*
OSCILLATION_SHARE = 0.1


@dataclass
class CellPlan:
    cell: Cell
    p: np.ndarray
    omega: float
    resolved: bool = True


@dataclass
class EikonalReport:
    mode: str  # "boundary" or "closure"
    eps: float
    boundary_lip: float
    residual_fraction: float
    sup_norm_u: float
    boundary_error: float
    lip_w: float
    mesh_constant: float
    sup_error: float
    n_cells: int
    collar_fraction: float
    max_rho: float
    plateau_fraction: float
    unresolved_cells: int
    hypotheses: HypothesisReport
    residual: ScalarField  # ‖Dv + Du‖_* - 1 on the interior
    base: ScalarField
    v: ScalarField
    ledger: CheckLedger = field(default_factory=CheckLedger)

    def as_record(self) -> dict:
        return {
            "mode": self.mode,
            "eps": self.eps,
            "boundary_lip": self.boundary_lip,
            "residual_fraction": self.residual_fraction,
            "sup_norm_u": self.sup_norm_u,
            "boundary_error": self.boundary_error,
            "lip_w": self.lip_w,
            "mesh_constant": self.mesh_constant,
            "sup_error": self.sup_error,
            "n_cells": self.n_cells,
            "collar_fraction": self.collar_fraction,
            "max_rho": self.max_rho,
            "plateau_fraction": self.plateau_fraction,
            "unresolved_cells": self.unresolved_cells,
            "hypotheses": self.hypotheses.as_record(),
        }


# ============================================
# BASE FIELD
# ============================================

def _input_mode(u0: ScalarField, domain: GridDomain) -> str:
    if np.all(u0.mask[domain.region]):
        return "closure"
    if np.all(u0.mask[domain.boundary]):
        return "boundary"
    raise DomainError("u0 must be defined on every boundary node (or on all of the closed domain)")


def base_field(
    u0: ScalarField,
    eps: float,
    boundary_bound: float = 1.0,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> Tuple[str, float, np.ndarray]:
    """
    Lipschitz base field on the lattice from the boundary (or closure) data

    Returns:
        (mode, lip(u0, ∂Ω), base values on the full lattice; 0 outside Ω̄)

    Raises:
        PreconditionError: lip(u0, ∂Ω) not strictly below boundary_bound,
            or closure data with constant above 1
    """
    tol = settings.TOLERANCE if tol is None else tol
    domain: GridDomain = u0.space
    mode = _input_mode(u0, domain)

    region_nodes = np.flatnonzero(domain.region.ravel())
    boundary_nodes = np.flatnonzero(domain.boundary.ravel())
    F = np.searchsorted(region_nodes, boundary_nodes)
    space = domain.metric_space(domain.region)
    region_values = u0.flat[region_nodes]

    boundary_field = ScalarField.on_subset(space, F, region_values[F], name="u0_boundary")
    boundary_lip = lip_constant(boundary_field, F, n_jobs=n_jobs).value
    if not boundary_lip < boundary_bound:
        raise PreconditionError(
            InequalityCheck("lip(u0, ∂Ω)", boundary_lip, boundary_bound, 0.0),
            "boundary data must have Lipschitz constant strictly below 1",
        )

    if mode == "closure":
        if region_nodes.size > settings.GLOBAL_APPROX_MAX_NODES:
            raise DomainError(
                f"closure data on {region_nodes.size} nodes; at most "
                f"{settings.GLOBAL_APPROX_MAX_NODES} are supported (pass boundary data instead)"
            )
        closure = ScalarField(space, region_values, name="u0")
        lip_u0 = lip_constant(closure, n_jobs=n_jobs).value
        check = InequalityCheck("lip(u0, Ω̄)", lip_u0, 1.0, tol)
        if not check.passed:
            raise PreconditionError(check, "closure data must be 1-Lipschitz")
        approx = global_approx(space, F, closure, eps / 4.0, K=1.0, tol=tol, n_jobs=n_jobs)
        values = approx.u.flat
    else:
        problem = ExtensionProblem(space=space, F=F, h=region_values[F], lam=max(boundary_lip, tol))
        values = midpoint_extension(problem, n_jobs=n_jobs).flat

    base = np.zeros(domain.n_nodes)
    base[region_nodes] = values
    return mode, boundary_lip, base.reshape(domain.shape)


# ============================================
# CELL PLANNING
# ============================================

def _cell_gradient_stats(domain: GridDomain, grads: np.ndarray, cell: Cell) -> Tuple[np.ndarray, float]:
    """Mean gradient p over the cell's interior nodes and ω = max ‖Dv - p‖_*"""
    inside = domain.interior[cell.block]
    g = np.moveaxis(grads[(slice(None),) + cell.block], 0, -1)[inside]
    p = g.mean(axis=0)
    omega = float(np.max(domain.norm.dual_norm(g - p)))
    return p, omega


def plan_cells(
    domain: GridDomain,
    grads: np.ndarray,
    cells: List[Cell],
    strict_refinement: bool = True,
) -> List[CellPlan]:
    """
    Refine cells until ω <= 0.1 (1 - ‖p‖_*)

    Raises:
        CellRefinementError: a minimal cell still oscillates (strict mode)
    """
    plans: List[CellPlan] = []

    def refine(cell: Cell) -> None:
        p, omega = _cell_gradient_stats(domain, grads, cell)
        allowance = OSCILLATION_SHARE * (1.0 - float(domain.norm.dual_norm(p)))
        if omega <= allowance:
            plans.append(CellPlan(cell, p, omega))
        elif cell.splittable():
            for child in cell.children():
                refine(child)
        elif strict_refinement:
            raise CellRefinementError(InequalityCheck(f"oscillation of Dv on minimal cell {cell}", omega, allowance, 0.0))
        else:
            plans.append(CellPlan(cell, p, omega, resolved=False))

    for cell in cells:
        refine(cell)
    return plans


def _build_cell(domain: GridDomain, plan: CellPlan, amplitude_cap: float) -> Optional[CellSawtooth]:
    if not plan.resolved and float(domain.norm.dual_norm(plan.p)) > 1.0 - plan.omega - settings.SAWTOOTH_MARGIN:
        return None
    return cell_sawtooth(domain, plan.cell, plan.p, amplitude_cap, omega=plan.omega)


# ============================================
# PIPELINE
# ============================================

def almost_classical(
    u0: ScalarField,
    eps: float,
    strict_refinement: bool = True,
    boundary_bound: float = 1.0,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> Tuple[ScalarField, EikonalReport]:
    """
    Lipschitz w with w = u0 on ∂Ω, lip(w) <= 1 up to the mesh constant,
    |w - u0| <= eps and ‖Dw‖_* = 1 off a small residual set

    Args:
        u0: field on a square-lattice GridDomain, defined on ∂Ω (or on Ω̄)
        eps: approximation tolerance (>= 4h)
        strict_refinement: raise when a minimal cell cannot be resolved;
            otherwise such cells count towards the residual
        boundary_bound: strict bound for lip(u0, ∂Ω)

    Returns:
        (w, EikonalReport)

    Raises:
        PreconditionError, DomainError, KernelUnderResolvedError: bad input
        HypothesisViolation, CellRefinementError, InvariantViolation: a
            certified inequality failed
    """
    tol = settings.TOLERANCE if tol is None else tol
    rng = rng or np.random.default_rng(settings.SEED)
    domain: GridDomain = u0.space
    if not isinstance(domain, GridDomain) or not domain.is_square_lattice:
        raise DomainError("the eikonal pipeline needs a field on a 2-D square lattice")
    if not eps >= 4.0 * domain.h_max * (1.0 - 1e-12):
        raise DomainError(f"eps {eps:.6g} must be at least 4h = {4.0 * domain.h_max:.6g}")

    logger.info(f"📊 Eikonal run: {domain}, eps={eps}")
    mode, boundary_lip, base = base_field(u0, eps, boundary_bound, tol=tol, n_jobs=n_jobs)
    reference = base if mode == "boundary" else np.where(domain.region, u0.values, 0.0)

    smoothed = variable_mollify(ScalarField(domain, base, name="base"), 0.5 * eps, lipschitz_scale=True, rng=rng, tol=tol)
    v = smoothed.v
    hypotheses = check_hypotheses(v, rng=rng, tol=tol)

    decomposition: CellDecomposition = decompose(domain, eps)
    grads = grad_field(v)
    plans = plan_cells(domain, grads, decomposition.cells, strict_refinement)

    amplitude_cap = 0.5 * eps
    width = settings.worker_count(n_jobs)
    if width == 1 or len(plans) <= 1:
        built = [_build_cell(domain, plan, amplitude_cap) for plan in plans]
    else:
        built = Parallel(n_jobs=width, prefer="threads")(delayed(_build_cell)(domain, plan, amplitude_cap) for plan in plans)

    u = np.zeros(domain.shape)
    du = np.zeros((2,) + domain.shape)
    owned = np.zeros(domain.shape, dtype=bool)
    plateau = np.zeros(domain.shape, dtype=bool)
    for plan, saw in zip(plans, built):
        block = plan.cell.block
        fresh = ~owned[block]
        owned[block] = True
        if saw is None:
            continue
        u[plan.cell.inner] = saw.values[1:-1, 1:-1]
        for k in range(2):
            du[k][block] = np.where(fresh, saw.grad[k], du[k][block])
        plateau[block] |= fresh & (saw.branch == PLATEAU)

    w = v.values + u
    w[domain.boundary] = u0.values[domain.boundary]
    w[domain.exterior] = 0.0

    total_grad = np.moveaxis(grads + du, 0, -1)
    H = np.where(domain.interior, hamiltonian_residual(np.zeros(2), total_grad, domain.norm), 0.0)
    off_level = domain.interior & (np.abs(H) > settings.RESIDUAL_TOL)
    n_interior = int(domain.interior.sum())
    residual_fraction = float(off_level.sum()) / n_interior

    region = domain.region
    sup_norm_u = float(np.abs(u).max())
    boundary_error = float(np.abs(w - u0.values)[domain.boundary].max())
    lip_w = stencil_lip(domain, w).value
    mesh_constant = max(0.0, lip_w - 1.0) / domain.h_max
    sup_error = float(np.abs(w - reference)[region].max())

    ledger = CheckLedger()
    ledger.extend(smoothed.ledger, prefix="smoothing: ")
    ledger.extend(hypotheses.ledger, prefix="hypotheses: ")
    ledger.extend(decomposition.ledger, prefix="cells: ")
    ledger.check_le("max |w - u0| on ∂Ω", boundary_error, 0.0, 0.0)
    ledger.check_le("sup |u|", sup_norm_u, amplitude_cap, tol)
    ledger.check_le("sup |w - u_ref|", sup_error, eps, tol)
    ledger.check_le("max H on owned interior nodes", float(H[owned & domain.interior].max(initial=-1.0)), 0.0, tol)
    ledger.check_le("mesh constant C of lip(w)", mesh_constant, settings.MESH_CONSTANT_CAP, 0.0)
    ledger.check_le("residual fraction", residual_fraction, settings.RHO_MAX, 0.0)
    ledger.require()

    max_rho = max((saw.rho for saw in built if saw is not None), default=0.0)
    report = EikonalReport(
        mode=mode,
        eps=float(eps),
        boundary_lip=float(boundary_lip),
        residual_fraction=residual_fraction,
        sup_norm_u=sup_norm_u,
        boundary_error=boundary_error,
        lip_w=float(lip_w),
        mesh_constant=float(mesh_constant),
        sup_error=sup_error,
        n_cells=len(plans),
        collar_fraction=decomposition.collar_fraction,
        max_rho=float(max_rho),
        plateau_fraction=float((plateau & domain.interior).sum()) / n_interior,
        unresolved_cells=sum(1 for plan in plans if not plan.resolved),
        hypotheses=hypotheses,
        residual=ScalarField(domain, H, mask=domain.interior, name="residual"),
        base=ScalarField(domain, base, name="base"),
        v=v,
        ledger=ledger,
    )
    logger.info(
        f"✅ Eikonal: {len(plans)} cells, residual fraction {residual_fraction:.4f}, "
        f"sup|w - u_ref| = {sup_error:.3e}, C = {mesh_constant:.3f}"
    )
    return ScalarField(domain, w, name="w"), report
