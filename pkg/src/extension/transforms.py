"""
EXTREMAL LIPSCHITZ EXTENSIONS
=============================
Cone envelopes over an anchor set on a finite metric space:

- sup-convolution  x -> max_y { h(y) - lam d(x,y) }   smallest lam-Lipschitz extension
- inf-convolution  x -> min_y { h(y) + lam d(x,y) }   largest lam-Lipschitz extension
- constrained maximum: largest lam-Lipschitz u with u = h on F and u <= b

Every transform is a direct minimisation over anchors, evaluated in row
blocks (see map_row_blocks) so the parallel width never changes a value.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from config import settings
from src.errors import DomainError, EmptyConstraintFamilyError
from src.metric import MetricSpace, ScalarField, lip_constant, map_row_blocks
from src.verification import CheckLedger


# ============================================
# PROBLEM DATA
# ============================================

@dataclass
class ExtensionProblem:
    """
    Extension data: values h on the constraint set F, slope lam
    """

    space: MetricSpace
    F: np.ndarray
    h: np.ndarray
    lam: float

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=int).ravel()
        self.h = np.asarray(self.h, dtype=float).ravel()
        if self.F.size == 0:
            raise DomainError("extension needs a nonempty constraint set F")
        if self.F.size != self.h.size:
            raise DomainError(f"{self.h.size} values for {self.F.size} constraint points")
        if np.unique(self.F).size != self.F.size:
            raise DomainError("constraint set F has repeated indices")
        if not np.all(np.isfinite(self.h)):
            raise DomainError("extension data must be finite")
        if not self.lam > 0:
            raise DomainError(f"slope must be positive, got {self.lam}")

    @classmethod
    def from_field(cls, space: MetricSpace, F: Sequence[int], field: ScalarField, lam: float) -> "ExtensionProblem":
        F = np.asarray(F, dtype=int)
        return cls(space=space, F=F, h=field.at(F), lam=float(lam))

    @property
    def data_field(self) -> ScalarField:
        return ScalarField.on_subset(self.space, self.F, self.h, name="h")

    def data_lipschitz(self, n_jobs: Optional[int] = None) -> float:
        """lip(h, F)"""
        return lip_constant(self.data_field, self.F, n_jobs=n_jobs).value

    def is_feasible(self, tol: Optional[float] = None) -> bool:
        tol = settings.TOLERANCE if tol is None else tol
        return self.data_lipschitz() <= self.lam + tol


@dataclass
class UpperBound:
    """
    Pointwise upper bound b on E; `active` is the explicit "bounded here" flag
    (inactive nodes carry no constraint, never a large float)
    """

    values: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        self.active = np.asarray(self.active, dtype=bool).ravel()
        if self.values.shape != self.active.shape:
            raise DomainError("bound values and activity flags differ in length")
        if not np.all(np.isfinite(self.values[self.active])):
            raise DomainError("active bound values must be finite")

    @classmethod
    def none(cls, n: int) -> "UpperBound":
        return cls(values=np.zeros(n), active=np.zeros(n, dtype=bool))

    @classmethod
    def everywhere(cls, values: np.ndarray) -> "UpperBound":
        values = np.asarray(values, dtype=float).ravel()
        return cls(values=values, active=np.ones(values.shape, dtype=bool))

    @classmethod
    def from_array(cls, values: np.ndarray) -> "UpperBound":
        """+inf entries mean unbounded"""
        values = np.asarray(values, dtype=float).ravel()
        active = np.isfinite(values)
        return cls(values=np.where(active, values, 0.0), active=active)


# ============================================
# CONE ENVELOPES
# ============================================

def cone_envelope(
    space: MetricSpace,
    anchors: np.ndarray,
    anchor_values: np.ndarray,
    lam: float,
    upper: bool = True,
    n_jobs: Optional[int] = None,
) -> np.ndarray:
    """
    min_y { r(y) + lam d(x,y) } (upper=True) or max_y { r(y) - lam d(x,y) }
    over anchors y, for every x in the space
    """
    anchors = np.asarray(anchors, dtype=int)
    anchor_values = np.asarray(anchor_values, dtype=float)
    if anchors.size == 0:
        raise DomainError("cone envelope needs at least one anchor")

    if upper:
        def block(rows: np.ndarray) -> np.ndarray:
            return np.min(anchor_values[None, :] + lam * space.distances(rows, anchors), axis=1)
    else:
        def block(rows: np.ndarray) -> np.ndarray:
            return np.max(anchor_values[None, :] - lam * space.distances(rows, anchors), axis=1)

    return np.concatenate(map_row_blocks(block, space.all_indices, n_jobs=n_jobs))


def _pin_to_data(values: np.ndarray, P: ExtensionProblem, label: str, tol: float) -> np.ndarray:
    """Write h back on F exactly once the envelope agrees with it"""
    gap = float(np.max(np.abs(values[P.F] - P.h)))
    if gap <= tol:
        values[P.F] = P.h
    else:
        logger.debug(f"⚠️ {label} misses the data by {gap:.3e} on F (infeasible slope)")
    return values


def sup_convolution(P: ExtensionProblem, tol: Optional[float] = None, n_jobs: Optional[int] = None) -> ScalarField:
    """
    Smallest lam-Lipschitz extension of h (McShane)

    Args:
        P: extension data
        tol: agreement tolerance for pinning v = h on F

    Returns:
        v on E; v = h on F exactly whenever lip(h, F) <= lam
    """
    tol = settings.TOLERANCE if tol is None else tol
    values = cone_envelope(P.space, P.F, P.h, P.lam, upper=False, n_jobs=n_jobs)
    return ScalarField(P.space, _pin_to_data(values, P, "sup-convolution", tol), name="sup_conv")


def inf_convolution(P: ExtensionProblem, tol: Optional[float] = None, n_jobs: Optional[int] = None) -> ScalarField:
    """
    Largest lam-Lipschitz extension of h (Whitney)
    """
    tol = settings.TOLERANCE if tol is None else tol
    values = cone_envelope(P.space, P.F, P.h, P.lam, upper=True, n_jobs=n_jobs)
    return ScalarField(P.space, _pin_to_data(values, P, "inf-convolution", tol), name="inf_conv")


def midpoint_extension(P: ExtensionProblem, n_jobs: Optional[int] = None) -> ScalarField:
    """Average of the two extremal extensions (lam-Lipschitz, equal to h on F)"""
    lower = sup_convolution(P, n_jobs=n_jobs)
    upper = inf_convolution(P, n_jobs=n_jobs)
    values = 0.5 * (lower.flat + upper.flat)
    values[P.F] = P.h
    return ScalarField(P.space, values, name="midpoint")


# ============================================
# CONSTRAINED MAXIMUM
# ============================================

def constrained_max_lipschitz(
    space: MetricSpace,
    F: Sequence[int],
    h: np.ndarray,
    bound: UpperBound,
    lam: float,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> ScalarField:
    """
    Largest lam-Lipschitz u with u = h on F and u <= b where b is active

    Computed as u(x) = min over anchors y of { b~(y) + lam d(x,y) } with
    b~ = h on F and b~ = b on the active nodes off F.

    Raises:
        EmptyConstraintFamilyError: naming the first violated precondition
        InvariantViolation: if the output misses u = h on F or u <= b
    """
    tol = settings.TOLERANCE if tol is None else tol
    P = ExtensionProblem(space=space, F=F, h=h, lam=lam)
    if bound.values.size != space.n:
        raise DomainError(f"bound has {bound.values.size} entries for {space.n} points")

    data_lip = P.data_lipschitz(n_jobs=n_jobs)
    if data_lip > lam + tol:
        raise EmptyConstraintFamilyError("lip(h, F) <= lambda", f"lip(h, F) = {data_lip:.12g}, lambda = {lam:.12g}")

    on_F_active = bound.active[P.F]
    if np.any(on_F_active):
        excess = float(np.max(P.h[on_F_active] - bound.values[P.F][on_F_active]))
        if excess > tol:
            raise EmptyConstraintFamilyError("h <= b on F", f"max(h - b) on F = {excess:.3e}")

    lower = sup_convolution(P, tol=tol, n_jobs=n_jobs).flat
    if np.any(bound.active):
        excess = float(np.max(lower[bound.active] - bound.values[bound.active]))
        if excess > tol:
            raise EmptyConstraintFamilyError("sup-convolution of h <= b", f"max excess {excess:.3e}")

    off_F = np.ones(space.n, dtype=bool)
    off_F[P.F] = False
    extra = np.flatnonzero(off_F & bound.active)
    anchors = np.concatenate([P.F, extra])
    anchor_values = np.concatenate([P.h, bound.values[extra]])
    values = cone_envelope(space, anchors, anchor_values, lam, upper=True, n_jobs=n_jobs)

    ledger = CheckLedger()
    ledger.check_le("max |u - h| on F", float(np.max(np.abs(values[P.F] - P.h))), 0.0, tol)
    if np.any(bound.active):
        ledger.check_le(
            "max (u - b) on bounded nodes",
            float(np.max(values[bound.active] - bound.values[bound.active])),
            0.0,
            tol,
        )
    ledger.require()
    values[P.F] = P.h
    return ScalarField(space, values, name="u_max")


# ============================================
# RANDOM FEASIBLE EXTENSIONS
# ============================================

def random_feasible_extensions(
    P: ExtensionProblem,
    count: int,
    rng: np.random.Generator,
    bound: Optional[UpperBound] = None,
    n_jobs: Optional[int] = None,
) -> List[ScalarField]:
    """
    Sample lam-Lipschitz extensions of h (and u <= b when a bound is given)

    Each sample is the inf-convolution of random super-data on random anchors,
    clipped between the extremal members of the family; clipping keeps the
    slope and the clip interval collapses to h on F.
    """
    lower = sup_convolution(P, n_jobs=n_jobs).flat
    if bound is None:
        upper = inf_convolution(P, n_jobs=n_jobs).flat
    else:
        upper = constrained_max_lipschitz(P.space, P.F, P.h, bound, P.lam, n_jobs=n_jobs).flat

    spread = float(np.max(upper - lower)) if P.space.n else 0.0
    samples: List[ScalarField] = []
    for k in range(count):
        n_anchors = int(rng.integers(1, P.space.n + 1))
        anchors = rng.choice(P.space.n, size=n_anchors, replace=False)
        offsets = rng.uniform(-1.0, 1.0, size=n_anchors) * (spread + 1.0)
        raw = cone_envelope(P.space, anchors, lower[anchors] + offsets, P.lam, upper=True, n_jobs=n_jobs)
        values = np.minimum(np.maximum(raw, lower), upper)
        values[P.F] = P.h
        samples.append(ScalarField(P.space, values, name=f"feasible_{k}"))
    return samples
