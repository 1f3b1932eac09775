"""
MOLLIFIERS
==========
- Kernel: polynomial bump (1 - (‖x‖/δ)²)³ on the lattice, unit discrete mass
- mollify: fixed-radius convolution, nearest-node continuation outside the box
- variable_mollify: per-node radius field, nodes grouped by radius level
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger
from scipy import ndimage
from scipy.signal import fftconvolve

from config import settings
from src.errors import DomainError, KernelUnderResolvedError
from src.metric import ScalarField
from src.smoothing.gradients import dual_grad_field
from src.smoothing.grid import GridDomain, stencil_lip
from src.verification import CheckLedger


@dataclass
class Kernel:
    """Bump profile sampled on lattice offsets within the radius"""

    radius: float
    weights: np.ndarray  # odd-sized array centred on the zero offset
    norm: str = "l2"

    @classmethod
    def bump(cls, domain: GridDomain, radius: float) -> "Kernel":
        """
        Build the normalized bump of the given radius

        Raises:
            KernelUnderResolvedError: radius below one mesh width
        """
        if radius < domain.h_max * (1.0 - 1e-12):
            raise KernelUnderResolvedError(
                f"kernel under-resolved: radius {radius:.6g} < mesh width {domain.h_max:.6g}"
            )
        reach = [int(np.floor(radius / step + 1e-9)) for step in domain.h]
        ranges = [np.arange(-r, r + 1) * step for r, step in zip(reach, domain.h)]
        grids = np.meshgrid(*ranges, indexing="ij")
        offsets = np.stack(grids, axis=-1)
        t = domain.norm.norm(offsets) / radius
        weights = np.where(t < 1.0, (1.0 - t ** 2) ** 3, 0.0)
        weights /= weights.sum()
        return cls(radius=float(radius), weights=weights, norm=domain.norm.p.value)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def half_width(self) -> tuple:
        return tuple(n // 2 for n in self.weights.shape)


def mollify(f: ScalarField, kernel: Kernel) -> ScalarField:
    """
    Discrete convolution f * θ_δ with nearest-node continuation outside the box
    """
    values = ndimage.convolve(f.values, kernel.weights, mode="nearest")
    return ScalarField(f.space, values, name=f"{f.name}_mollified")


def _convolve_nearest(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """FFT convolution of an edge-padded array (same output shape)"""
    pad = [(n // 2, n // 2) for n in weights.shape]
    padded = np.pad(values, pad, mode="edge")
    return fftconvolve(padded, weights, mode="valid")


# ============================================
# VARIABLE RADIUS
# ============================================

@dataclass
class VariableMollifyResult:
    v: ScalarField
    radius: np.ndarray  # kernel radius actually used per node (0 = untouched)
    levels: int
    ledger: CheckLedger = field(default_factory=CheckLedger)


def radius_levels(radius: np.ndarray, max_levels: int, floor: float) -> np.ndarray:
    """
    Map radii to at most max_levels distinct values, never rounding up;
    radii below `floor` map to 0
    """
    out = np.where(radius >= floor, radius, 0.0)
    active = out > 0
    unique = np.unique(out[active])
    if unique.size <= max_levels:
        return out
    grid = np.linspace(unique[0], unique[-1], max_levels)
    index = np.searchsorted(grid, out[active], side="right") - 1
    out[active] = grid[np.clip(index, 0, max_levels - 1)]
    return out


def variable_mollify(
    u: ScalarField,
    eps_field: np.ndarray,
    clamp_boundary: bool = True,
    lipschitz_scale: bool = False,
    audit_nodes: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
) -> VariableMollifyResult:
    """
    Convolve u at each node with a bump of radius eps_field(x)

    Args:
        u: field on a GridDomain
        eps_field: requested radius per node (>= 2h on the interior)
        clamp_boundary: clamp radii by ½ dist(·, ∂Ω); nodes whose clamped
            radius drops below one mesh width keep v = u
        lipschitz_scale: divide the radius by max(1, lip(u)) so that
            |u - v| <= eps_field holds for steep fields too
        audit_nodes: sampled nodes for the dual-gradient audit (default BALL_SAMPLES)

    Returns:
        VariableMollifyResult with |u - v| <= scale * eps_field, where scale
        is 1 when lipschitz_scale is set and max(1, lip(u)) otherwise

    Raises:
        KernelUnderResolvedError: requested radius below 2h on the interior
    """
    tol = settings.TOLERANCE if tol is None else tol
    domain: GridDomain = u.space
    if not isinstance(domain, GridDomain):
        raise DomainError("variable_mollify needs a field on a GridDomain")
    eps_field = np.broadcast_to(np.asarray(eps_field, dtype=float), domain.shape).copy()
    if np.any(eps_field[domain.interior] <= 0):
        raise DomainError("eps_field must be positive on the interior")
    smallest = float(eps_field[domain.interior].min())
    if smallest < 2.0 * domain.h_max * (1.0 - 1e-12):
        raise KernelUnderResolvedError(
            f"eps_field under-resolved: min {smallest:.6g} < 2h = {2.0 * domain.h_max:.6g}"
        )

    K = stencil_lip(domain, u.values).value
    scale = max(1.0, K)
    radius = eps_field / scale if lipschitz_scale else eps_field.copy()
    if clamp_boundary:
        radius = np.minimum(radius, 0.5 * domain.boundary_distance)
    radius = np.where(domain.interior, radius, 0.0)
    radius = radius_levels(radius, settings.RADIUS_LEVELS, floor=domain.h_max)

    v = u.values.copy()
    levels = np.unique(radius[radius > 0])
    for level in levels:
        kernel = Kernel.bump(domain, float(level))
        at_level = radius == level
        v[at_level] = _convolve_nearest(u.values, kernel.weights)[at_level]

    ledger = CheckLedger()
    gap = np.abs(u.values - v)
    allowed = eps_field if lipschitz_scale else scale * eps_field
    excess = np.where(domain.region, gap - allowed, -np.inf)
    label = "eps_field" if lipschitz_scale else "max(1, lip u) * eps_field"
    ledger.check_le(f"max (|u - v| - {label})", float(excess.max()), 0.0, tol)
    ledger.check_le("max |u - v| on the boundary", float(gap[domain.boundary].max()), 0.0, 0.0)

    audit = gradient_audit(u, ScalarField(domain, v), radius, audit_nodes, rng)
    ledger.extend(audit)
    ledger.require()
    logger.debug(f"📊 Variable mollification: {levels.size} radius levels, max |u-v| = {float(gap.max()):.3e}")
    return VariableMollifyResult(v=ScalarField(domain, v, name=f"{u.name}_smoothed"), radius=radius, levels=int(levels.size), ledger=ledger)


def gradient_audit(
    u: ScalarField,
    v: ScalarField,
    radius: np.ndarray,
    n_nodes: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> CheckLedger:
    """
    ‖Dv(x)‖_* <= lip(u, B(x, r(x) + h) ∩ Ω) + r(x) + C h at sampled nodes
    whose radius resolves the kernel (r >= 2h); records the measured C
    """
    domain: GridDomain = u.space
    n_nodes = settings.BALL_SAMPLES if n_nodes is None else n_nodes
    rng = rng or np.random.default_rng(settings.SEED)
    ledger = CheckLedger()
    resolved = np.flatnonzero((radius >= 2.0 * domain.h_max).ravel())
    if resolved.size == 0:
        ledger.check_le("gradient audit mesh constant C", 0.0, settings.MESH_CONSTANT_CAP, 0.0)
        return ledger

    picks = np.sort(rng.choice(resolved, size=min(n_nodes, resolved.size), replace=False))
    grad = dual_grad_field(v).flat
    worst = 0.0
    for flat in picks:
        node = np.unravel_index(int(flat), domain.shape)
        r = float(radius.ravel()[flat])
        ball = domain.ball_mask(node, r + domain.h_max)
        local = stencil_lip(domain, u.values, mask=ball).value
        worst = max(worst, (float(grad[flat]) - local - r) / domain.h_max)
    ledger.check_le("gradient audit mesh constant C", max(0.0, worst), settings.MESH_CONSTANT_CAP, 0.0)
    return ledger
