"""
FLATTENING AND TOLERANCE SHAPING
================================
- flatten: φ_ε (shift toward 0 by ε/2, exact zero on [-ε/2, ε/2])
- tolerance_shape: running unit-window average of δ(r) = (K - L(r)) / 2
- smooth_below_constant: variable mollification with radius
  min{unit, ε, ρ, δ̃(‖x - c‖)} (and ½ dist(·, ∂Ω)), so that ‖Dv‖_* stays below K
- homogeneous_smoothing: zero boundary data, flatten then mollify
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid

from config import settings
from src.errors import DomainError
from src.metric import ScalarField
from src.smoothing.gradients import dual_grad_field
from src.smoothing.grid import GridDomain, stencil_lip
from src.smoothing.kernels import Kernel, mollify, variable_mollify
from src.verification import CheckLedger


def flatten_values(t: np.ndarray, eps: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    half = 0.5 * eps
    return np.where(t >= half, t - half, np.where(t <= -half, t + half, 0.0))


def flatten(f: ScalarField, eps: float) -> ScalarField:
    """
    φ_ε ∘ f

    Raises:
        DomainError: eps <= 0
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return f.with_values(flatten_values(f.values, eps), name=f"{f.name}_flat")


# ============================================
# TOLERANCE SHAPING
# ============================================

@dataclass
class ShapedTolerance:
    radii: np.ndarray
    delta: np.ndarray
    shaped: np.ndarray
    unit: float
    ledger: CheckLedger = field(default_factory=CheckLedger)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        """δ̃ at arbitrary radii (constant beyond the last sample)"""
        return np.interp(r, self.radii, self.shaped)


def tolerance_shape(
    radii: np.ndarray,
    L_profile: np.ndarray,
    K: float,
    unit: float = 1.0,
    tol: Optional[float] = None,
) -> ShapedTolerance:
    """
    δ̃(t) = (1/unit) ∫_t^{t+unit} δ(s) ds with δ = (K - L) / 2

    Args:
        radii: increasing sample radii r_k
        L_profile: L(r_k), nondecreasing, <= K
        K: target constant
        unit: averaging window length

    Raises:
        DomainError: L exceeds K ("interior constant exceeds K") or is not monotone
    """
    tol = settings.TOLERANCE if tol is None else tol
    radii = np.asarray(radii, dtype=float)
    L = np.asarray(L_profile, dtype=float)
    if radii.ndim != 1 or radii.shape != L.shape or radii.size < 2:
        raise DomainError("need at least two matching radius / L samples")
    if np.any(np.diff(radii) <= 0):
        raise DomainError("radii must be strictly increasing")
    if np.any(L > K + tol):
        worst = int(np.argmax(L))
        raise DomainError(f"interior constant exceeds K: L({radii[worst]:.6g}) = {L[worst]:.12g} > {K:.12g}")
    if np.any(np.diff(L) < -tol):
        raise DomainError("L profile must be nondecreasing")
    if not unit > 0:
        raise DomainError(f"unit must be positive, got {unit}")

    delta = np.maximum(0.5 * (K - L), 0.0)
    # extend δ as a constant past the last sample so every window is covered
    grid = np.concatenate([radii, [radii[-1] + unit]])
    values = np.concatenate([delta, [delta[-1]]])
    antiderivative = cumulative_trapezoid(values, grid, initial=0.0)
    upper = np.interp(radii + unit, grid, antiderivative)
    shaped = (upper - antiderivative[:-1]) / unit

    ledger = CheckLedger()
    ledger.check_le("max (shaped - delta)", float(np.max(shaped - delta)), 0.0, tol)
    ledger.check_le("-min shaped", float(-np.min(shaped)), 0.0, 0.0)
    ledger.check_true("shaped strictly positive", bool(np.all(shaped > 0)))
    steps = np.abs(np.diff(shaped))
    spans = np.diff(radii)
    slope = float(np.max(steps / spans)) if steps.size else 0.0
    ledger.check_le("sample-to-sample slope of shaped", slope, float(np.max(delta)) / unit + tol, tol)
    return ShapedTolerance(radii=radii, delta=delta, shaped=shaped, unit=float(unit), ledger=ledger)


# ============================================
# SMOOTHING BELOW A CONSTANT
# ============================================

@dataclass
class SmoothingResult:
    v: ScalarField
    eps_field: np.ndarray
    shaped: Optional[ShapedTolerance]
    ledger: CheckLedger = field(default_factory=CheckLedger)


def lipschitz_profile(u: ScalarField, center: Tuple[float, ...], radii: np.ndarray, unit: float) -> np.ndarray:
    """L(r) = lip(u, B(center, r + unit) ∩ Ω), made nondecreasing"""
    domain: GridDomain = u.space
    offsets = domain.points - np.asarray(center)
    distance = domain.norm.norm(offsets).reshape(domain.shape)
    L = np.array([
        stencil_lip(domain, u.values, mask=(distance <= r + unit) & domain.region).value
        for r in radii
    ])
    return np.maximum.accumulate(L)


def smooth_below_constant(
    u: ScalarField,
    K: float,
    eps: float,
    rho: Optional[float] = None,
    unit: Optional[float] = None,
    n_radii: int = 32,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
) -> SmoothingResult:
    """
    Smooth u (whose local constants stay strictly below K) into v with
    ‖Dv‖_* < K on the interior, |u - v| <= eps and v = u on ∂Ω

    The radius field is min{unit, eps, rho, δ̃(‖x - c‖)} with c the box center
    and δ̃ the shaped tolerance of the profile r -> lip(u, B(c, r + unit) ∩ Ω);
    variable_mollify adds the ½ dist(·, ∂Ω) clamp.
    """
    tol = settings.TOLERANCE if tol is None else tol
    domain: GridDomain = u.space
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    rho = settings.RHO_MAX if rho is None else rho
    unit = 0.25 * max(hi - lo for lo, hi in domain.box) if unit is None else unit
    center = tuple(0.5 * (lo + hi) for lo, hi in domain.box)

    reach = float(np.max(domain.norm.norm(domain.points - np.asarray(center))))
    radii = np.linspace(0.0, reach, n_radii)
    L = lipschitz_profile(u, center, radii, unit)
    shaped = tolerance_shape(radii, L, K, unit=unit, tol=tol)

    distance = domain.norm.norm(domain.points - np.asarray(center)).reshape(domain.shape)
    eps_field = np.minimum.reduce([
        np.full(domain.shape, unit),
        np.full(domain.shape, eps),
        np.full(domain.shape, rho),
        shaped(distance),
    ])
    mollified = variable_mollify(u, eps_field, clamp_boundary=True, lipschitz_scale=True, rng=rng, tol=tol)

    ledger = CheckLedger()
    ledger.extend(shaped.ledger, prefix="tolerance: ")
    ledger.extend(mollified.ledger, prefix="mollify: ")
    grads = dual_grad_field(mollified.v)
    worst = float(grads.values[domain.interior].max())
    ledger.check_le("max ‖Dv‖_* on the interior", worst, K, settings.MESH_CONSTANT_CAP * domain.h_max)
    ledger.require()
    logger.info(f"✅ Smoothed below K={K:.6g}: max ‖Dv‖_* = {worst:.6g}")
    return SmoothingResult(v=mollified.v, eps_field=eps_field, shaped=shaped, ledger=ledger)


def homogeneous_smoothing(u: ScalarField, eps: float, tol: Optional[float] = None) -> SmoothingResult:
    """
    For u = 0 on ∂Ω: v = mollify(φ_ε ∘ u) with radius eps / (4 max(1, lip u)),
    so v vanishes on a band along ∂Ω and |u - v| <= eps
    """
    tol = settings.TOLERANCE if tol is None else tol
    domain: GridDomain = u.space
    boundary_values = u.values[domain.boundary]
    if np.max(np.abs(boundary_values)) > tol:
        raise DomainError("homogeneous smoothing needs u = 0 on the boundary")
    K = stencil_lip(domain, u.values).value
    radius = eps / (4.0 * max(1.0, K))
    inside = u.with_values(np.where(domain.region, u.values, 0.0))
    flat = flatten(inside, eps)
    v = mollify(flat, Kernel.bump(domain, radius))
    values = np.where(domain.region, v.values, u.values)

    ledger = CheckLedger()
    ledger.check_le("max |u - v|", float(np.max(np.abs(values - u.values)[domain.region])), eps, tol)
    ledger.check_le("max |v| on the boundary", float(np.max(np.abs(values[domain.boundary]))), 0.0, tol)
    ledger.require()
    return SmoothingResult(v=ScalarField(domain, values, name=f"{u.name}_smoothed"), eps_field=np.full(domain.shape, radius), shaped=None, ledger=ledger)
