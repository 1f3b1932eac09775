"""
MOREAU AND LASRY-LIONS ENVELOPES
================================
On a K-Lipschitz lattice field f:

- moreau_inf:  g_lam(x) = min_y { f(y) + ‖x - y‖² / (2 lam) }
- moreau_sup:  g^mu(x)  = max_y { f(y) - ‖x - y‖² / (2 mu) }
- lasry_lions: g_lam^mu = moreau_sup(moreau_inf(f, lam), mu)

Minimizers lie within 2 lam K of x, so every scan is restricted to that
window (the full window lattice is scanned, no convexity shortcut).
Values beyond the box continue by the nearest node.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, model_validator

from config import settings
from src.errors import DomainError
from src.metric import ScalarField
from src.smoothing.grid import GridDomain, stencil_lip
from src.verification import CheckLedger


class EnvelopeParams(BaseModel):
    """Envelope parameters, 0 < mu < lambda"""

    lam: float
    mu: float
    K: Optional[float] = None

    @model_validator(mode="after")
    def check_order(self) -> "EnvelopeParams":
        if not 0.0 < self.mu < self.lam:
            raise ValueError(f"need 0 < mu < lambda, got mu={self.mu}, lambda={self.lam}")
        if self.K is not None and self.K < 0:
            raise ValueError(f"K must be nonnegative, got {self.K}")
        return self


def effective_constant(f: ScalarField, K: Optional[float]) -> float:
    """Declared K, or the measured lattice constant when that is larger"""
    measured = stencil_lip(f.space, f.values).value
    if K is None or measured > K:
        if K is not None:
            logger.debug(f"⚠️ measured lip {measured:.6g} exceeds declared K {K:.6g}; using measured")
        return measured
    return float(K)


def _window_scan(values: np.ndarray, domain: GridDomain, lam: float, K: float, minimize: bool) -> np.ndarray:
    radius = 2.0 * lam * K
    offsets = domain.offsets_within(radius) if radius > 0 else np.zeros((1, domain.d), dtype=int)
    reach = np.max(np.abs(offsets), axis=0) if offsets.size else np.zeros(domain.d, dtype=int)
    padded = np.pad(values, [(int(r), int(r)) for r in reach], mode="edge")
    h = np.asarray(domain.h)
    out = np.full(values.shape, np.inf if minimize else -np.inf)
    for k in offsets:
        window = tuple(slice(int(r + step), int(r + step) + n) for r, step, n in zip(reach, k, values.shape))
        penalty = float(domain.norm.norm(k * h)) ** 2 / (2.0 * lam)
        if minimize:
            np.minimum(out, padded[window] + penalty, out=out)
        else:
            np.maximum(out, padded[window] - penalty, out=out)
    return out


def moreau_inf(f: ScalarField, lam: float, K: Optional[float] = None) -> ScalarField:
    """
    Lower Moreau envelope g_lam (<= f, K-Lipschitz)
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    domain: GridDomain = f.space
    K = effective_constant(f, K)
    values = _window_scan(f.values, domain, lam, K, minimize=True)
    return ScalarField(domain, values, name=f"{f.name}_inf")


def moreau_sup(f: ScalarField, mu: float, K: Optional[float] = None) -> ScalarField:
    """
    Upper Moreau envelope g^mu (>= f, K-Lipschitz)
    """
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    domain: GridDomain = f.space
    K = effective_constant(f, K)
    values = _window_scan(f.values, domain, mu, K, minimize=False)
    return ScalarField(domain, values, name=f"{f.name}_sup")


def lasry_lions(f: ScalarField, params: EnvelopeParams) -> ScalarField:
    """g_lam^mu = moreau_sup(moreau_inf(f, lam), mu)"""
    K = effective_constant(f, params.K)
    inner = moreau_inf(f, params.lam, K)
    outer = moreau_sup(inner, params.mu, K)
    return ScalarField(f.space, outer.values, name=f"{f.name}_ll")


def lasry_lions_bound(lam: float, mu: float, K: float, h: float) -> float:
    """Uniform distance allowed between g_lam^mu and f on a lattice of width h"""
    return 0.5 * (lam + mu) * K ** 2 + 2.0 * h


# ============================================
# LOCAL LIPSCHITZ AUDIT
# ============================================

@dataclass
class BallRecord:
    center: Tuple[int, ...]
    radius: float
    lhs: float  # lip(result, B(x0, r))
    rhs: float  # lip(source, B(x0, r + spread))


@dataclass
class LocalAudit:
    spread: float
    mesh_constant: float
    balls: List[BallRecord] = field(default_factory=list)
    ledger: CheckLedger = field(default_factory=CheckLedger)


def local_lipschitz_audit(
    source: ScalarField,
    result: ScalarField,
    spread: float,
    rng: Optional[np.random.Generator] = None,
    n_balls: Optional[int] = None,
    label: str = "local bound",
) -> LocalAudit:
    """
    Check lip(result, B(x0, r)) <= lip(source, B(x0, r + spread)) + C h on
    sampled balls and measure the smallest such C

    Ball centers are uniform over region nodes, radii uniform in
    [2h, quarter of the shortest box side].
    """
    domain: GridDomain = source.space
    rng = rng or np.random.default_rng(settings.SEED)
    n_balls = settings.BALL_SAMPLES if n_balls is None else n_balls
    nodes = np.flatnonzero(domain.region.ravel())
    r_max = max(2.0 * domain.h_max, 0.25 * min(hi - lo for lo, hi in domain.box))

    audit = LocalAudit(spread=float(spread), mesh_constant=0.0)
    worst = 0.0
    for _ in range(n_balls):
        center = np.unravel_index(int(rng.choice(nodes)), domain.shape)
        center = tuple(int(c) for c in center)
        r = float(rng.uniform(2.0 * domain.h_max, r_max))
        lhs = stencil_lip(domain, result.values, mask=domain.ball_mask(center, r)).value
        rhs = stencil_lip(domain, source.values, mask=domain.ball_mask(center, r + spread)).value
        audit.balls.append(BallRecord(center=center, radius=r, lhs=lhs, rhs=rhs))
        worst = max(worst, (lhs - rhs) / domain.h_max)

    audit.mesh_constant = max(0.0, worst)
    audit.ledger.check_le(f"{label}: mesh constant C over {n_balls} balls", audit.mesh_constant, settings.MESH_CONSTANT_CAP, 0.0)
    return audit


def envelope_checks(
    f: ScalarField,
    params: EnvelopeParams,
    rng: Optional[np.random.Generator] = None,
    n_balls: Optional[int] = None,
    tol: Optional[float] = None,
) -> Tuple[ScalarField, ScalarField, ScalarField, CheckLedger]:
    """
    All three envelopes of f plus their certified inequalities:
    K-Lipschitz outputs, the sandwich g_lam <= f <= g^mu, g_lam <= g_lam^mu <= g^mu,
    and the three local Lipschitz bounds on sampled balls
    """
    tol = settings.TOLERANCE if tol is None else tol
    rng = rng or np.random.default_rng(settings.SEED)
    domain: GridDomain = f.space
    K = effective_constant(f, params.K)
    lower = moreau_inf(f, params.lam, K)
    upper = moreau_sup(f, params.mu, K)
    ll = lasry_lions(f, EnvelopeParams(lam=params.lam, mu=params.mu, K=K))

    ledger = CheckLedger()
    for name, g in (("g_lambda", lower), ("g^mu", upper), ("g_lambda^mu", ll)):
        ledger.check_le(f"lip({name})", stencil_lip(domain, g.values).value, K, tol)
    ledger.check_le("max (g_lambda - f)", float(np.max(lower.values - f.values)), 0.0, tol)
    ledger.check_le("max (f - g^mu)", float(np.max(f.values - upper.values)), 0.0, tol)
    ledger.check_le("max (g_lambda - g_lambda^mu)", float(np.max(lower.values - ll.values)), 0.0, tol)
    ledger.check_le("max (g_lambda^mu - g^mu)", float(np.max(ll.values - upper.values)), 0.0, tol)
    ledger.check_le(
        "‖g_lambda^mu - f‖_inf",
        float(np.max(np.abs(ll.values - f.values)[domain.region])),
        lasry_lions_bound(params.lam, params.mu, K, domain.h_max),
        tol,
    )

    for label, g, spread in (
        ("g_lambda", lower, 2.0 * params.lam * K),
        ("g^mu", upper, 2.0 * params.mu * K),
        ("g_lambda^mu", ll, 2.0 * (params.lam + params.mu) * K),
    ):
        audit = local_lipschitz_audit(f, g, spread, rng=rng, n_balls=n_balls, label=f"local bound {label}")
        ledger.extend(audit.ledger)
    return lower, upper, ll, ledger
