"""
GRID DOMAINS
============
Regular lattices over a box in R^d (d in {1, 2}) carrying a region mask Ω̄.

- boundary: region nodes with an axis neighbour outside the region (or on
  the lattice edge)
- interior: region nodes that are not boundary
- exterior: everything else

Also the lattice Lipschitz constant `stencil_lip`, measured over node pairs
whose index offset lies within STENCIL_RADIUS.
"""

from functools import cached_property
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config import settings
from src.errors import DomainError
from src.metric import MetricSpace, NormContext, NormTag, ScalarField, dist_to_set_many


class LatticeLipschitz(NamedTuple):
    value: float
    witness: Tuple[Tuple[int, ...], Tuple[int, ...]]


class GridDomain:
    """
    Lattice over a box with interior / boundary / exterior masks
    """

    def __init__(
        self,
        box: Sequence[Tuple[float, float]],
        shape: Sequence[int],
        region: Optional[np.ndarray] = None,
        norm: "str | NormTag" = NormTag.L2,
    ):
        """
        Initialize grid domain

        Args:
            box: per-axis (lo, hi)
            shape: nodes per axis (>= 3)
            region: boolean mask of Ω̄ on the lattice (default: the whole box)
            norm: ambient norm tag
        """
        self.box = [(float(lo), float(hi)) for lo, hi in box]
        self.shape = tuple(int(n) for n in shape)
        self.d = len(self.shape)
        if self.d not in (1, 2) or len(self.box) != self.d:
            raise DomainError(f"grids are 1- or 2-dimensional, got box {box} and shape {shape}")
        if any(n < 3 for n in self.shape):
            raise DomainError(f"every axis needs at least 3 nodes, got {self.shape}")
        if any(hi <= lo for lo, hi in self.box):
            raise DomainError(f"box sides must have positive length, got {self.box}")

        self.h = tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.box, self.shape))
        self.norm = NormContext(norm)

        region = np.ones(self.shape, dtype=bool) if region is None else np.asarray(region, dtype=bool)
        if region.shape != self.shape:
            raise DomainError(f"region mask has shape {region.shape}, lattice is {self.shape}")
        self.region = region

        padded = np.pad(region, 1, mode="constant", constant_values=False)
        all_neighbours_in = np.ones(self.shape, dtype=bool)
        for axis in range(self.d):
            for step in (-1, 1):
                shifted = np.roll(padded, step, axis=axis)
                all_neighbours_in &= shifted[tuple(slice(1, -1) for _ in range(self.d))]
        self.interior = region & all_neighbours_in
        self.boundary = region & ~self.interior
        self.exterior = ~region
        if not self.interior.any():
            raise DomainError("domain has no interior nodes at this resolution")

    # ============================================
    # CONSTRUCTORS
    # ============================================

    @classmethod
    def interval(cls, lo: float = 0.0, hi: float = 1.0, n: int = 257, norm: "str | NormTag" = NormTag.L2) -> "GridDomain":
        return cls([(lo, hi)], [n], norm=norm)

    @classmethod
    def square(cls, lo: float = 0.0, hi: float = 1.0, n: int = 257, norm: "str | NormTag" = NormTag.L2) -> "GridDomain":
        return cls([(lo, hi), (lo, hi)], [n, n], norm=norm)

    @classmethod
    def disc(
        cls,
        radius: float = 1.0,
        n: int = 257,
        center: Tuple[float, float] = (0.0, 0.0),
        norm: "str | NormTag" = NormTag.L2,
        shape_norm: "str | NormTag" = NormTag.L2,
    ) -> "GridDomain":
        """Closed ball of the given radius (measured in shape_norm) on a square lattice"""
        cx, cy = center
        box = [(cx - radius, cx + radius), (cy - radius, cy + radius)]
        xs = np.linspace(*box[0], n)
        ys = np.linspace(*box[1], n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        offsets = np.stack([X - cx, Y - cy], axis=-1)
        region = NormContext(shape_norm).norm(offsets) <= radius * (1.0 + 1e-12)
        return cls(box, [n, n], region=region, norm=norm)

    @classmethod
    def from_predicate(
        cls,
        box: Sequence[Tuple[float, float]],
        shape: Sequence[int],
        predicate: Callable[..., np.ndarray],
        norm: "str | NormTag" = NormTag.L2,
    ) -> "GridDomain":
        """Region = nodes where predicate(*coordinate_arrays) is true"""
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(box, shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        return cls(box, shape, region=np.asarray(predicate(*grids), dtype=bool), norm=norm)

    # ============================================
    # GEOMETRY
    # ============================================

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def h_min(self) -> float:
        return float(min(self.h))

    @property
    def h_max(self) -> float:
        return float(max(self.h))

    @property
    def is_square_lattice(self) -> bool:
        return self.d == 2 and self.shape[0] == self.shape[1] and abs(self.h[0] - self.h[1]) <= 1e-12 * self.h[0]

    @cached_property
    def axes(self) -> List[np.ndarray]:
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.box, self.shape)]

    @cached_property
    def points(self) -> np.ndarray:
        """(n_nodes, d) coordinates in row-major node order"""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @cached_property
    def boundary_distance(self) -> np.ndarray:
        """dist(x, ∂Ω) in the ambient norm for every node"""
        space = self.metric_space()
        boundary = np.flatnonzero(self.boundary.ravel())
        distances = dist_to_set_many(space, space.all_indices, boundary)
        return distances.reshape(self.shape)

    def metric_space(self, mask: Optional[np.ndarray] = None) -> MetricSpace:
        """Nodes (optionally masked) as a finite metric space"""
        points = self.points if mask is None else self.points[np.asarray(mask, dtype=bool).ravel()]
        return MetricSpace.from_points(points, norm=self.norm.p)

    def offsets_within(self, radius: float, strict: bool = False) -> np.ndarray:
        """Integer lattice offsets k with ‖k h‖ <= radius (< radius when strict)"""
        reach = [int(np.floor(radius / step + 1e-9)) for step in self.h]
        ranges = [np.arange(-r, r + 1) for r in reach]
        grid = np.stack([g.ravel() for g in np.meshgrid(*ranges, indexing="ij")], axis=1)
        lengths = self.norm.norm(grid * np.asarray(self.h))
        keep = lengths < radius if strict else lengths <= radius * (1.0 + 1e-12)
        return grid[keep]

    def ball_mask(self, center: Tuple[int, ...], radius: float) -> np.ndarray:
        """Region nodes x with ‖x - center‖ <= radius"""
        offsets = self.points - self.points[np.ravel_multi_index(center, self.shape)]
        inside = self.norm.norm(offsets) <= radius * (1.0 + 1e-12)
        return inside.reshape(self.shape) & self.region

    def field(self, values: np.ndarray, name: str = "f", mask: Optional[np.ndarray] = None) -> ScalarField:
        return ScalarField(self, values, mask=mask, name=name)

    def sample(self, func: Callable[..., np.ndarray], name: str = "f") -> ScalarField:
        """Evaluate func(*coordinate_arrays) on the lattice"""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return ScalarField(self, np.broadcast_to(func(*grids), self.shape), name=name)

    def __repr__(self) -> str:
        return (
            f"GridDomain(d={self.d}, shape={self.shape}, h={tuple(round(s, 12) for s in self.h)}, "
            f"norm={self.norm.p.value}, interior={int(self.interior.sum())}, boundary={int(self.boundary.sum())})"
        )


# ============================================
# LATTICE LIPSCHITZ CONSTANT
# ============================================

def _half_offsets(d: int, radius: int) -> List[Tuple[int, ...]]:
    """Nonzero offsets up to sign (first nonzero component positive)"""
    ranges = [range(-radius, radius + 1)] * d
    offsets = []
    for k in np.stack([g.ravel() for g in np.meshgrid(*ranges, indexing="ij")], axis=1):
        nonzero = k[k != 0]
        if nonzero.size and nonzero[0] > 0:
            offsets.append(tuple(int(c) for c in k))
    return offsets


def _shift_slices(k: Tuple[int, ...], shape: Tuple[int, ...]) -> Tuple[Tuple[slice, ...], Tuple[slice, ...]]:
    source, target = [], []
    for step, n in zip(k, shape):
        if step >= 0:
            source.append(slice(0, n - step))
            target.append(slice(step, n))
        else:
            source.append(slice(-step, n))
            target.append(slice(0, n + step))
    return tuple(source), tuple(target)


def stencil_lip(
    domain: GridDomain,
    values: np.ndarray,
    mask: Optional[np.ndarray] = None,
    radius: Optional[int] = None,
) -> LatticeLipschitz:
    """
    Discrete Lipschitz constant over node pairs with index offset within
    `radius` (per axis), both endpoints in `mask` (default: the region)

    Returns:
        (max quotient, witness node pair)
    """
    radius = settings.STENCIL_RADIUS if radius is None else int(radius)
    values = np.asarray(values, dtype=float).reshape(domain.shape)
    mask = domain.region if mask is None else np.asarray(mask, dtype=bool).reshape(domain.shape)
    if not mask.any():
        return LatticeLipschitz(0.0, ((0,) * domain.d, (0,) * domain.d))

    # crop to the bounding box of the mask
    hits = np.nonzero(mask)
    lo = [int(ix.min()) for ix in hits]
    hi = [int(ix.max()) + 1 for ix in hits]
    crop = tuple(slice(a, b) for a, b in zip(lo, hi))
    values, mask = values[crop], mask[crop]

    h = np.asarray(domain.h)
    best, witness = 0.0, ((0,) * domain.d, (0,) * domain.d)
    for k in _half_offsets(domain.d, radius):
        if any(abs(step) >= n for step, n in zip(k, values.shape)):
            continue
        source, target = _shift_slices(k, values.shape)
        both = mask[source] & mask[target]
        if not both.any():
            continue
        length = float(domain.norm.norm(np.asarray(k) * h))
        quotient = np.where(both, np.abs(values[target] - values[source]), 0.0) / length
        index = np.unravel_index(int(np.argmax(quotient)), quotient.shape)
        if quotient[index] > best:
            best = float(quotient[index])
            start = tuple(int(i + s.start + offset) for i, s, offset in zip(index, source, lo))
            witness = (start, tuple(a + b for a, b in zip(start, k)))
    logger.trace(f"stencil lip {best:.12g} at {witness}")
    return LatticeLipschitz(best, witness)
