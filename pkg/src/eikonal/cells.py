"""
CELL DECOMPOSITION
==================
Dyadic quadtree over node-index squares of a square lattice. A cell is
accepted when it lies fully inside Ω̄ (strict-interior nodes interior,
edge nodes interior or boundary) and its diameter in the ambient norm is
at most eps. Interior nodes left uncovered form the collar.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from loguru import logger

from config import settings
from src.errors import DomainError, KernelUnderResolvedError
from src.smoothing.grid import GridDomain
from src.verification import CheckLedger


@dataclass(frozen=True)
class Cell:
    """Closed square of nodes [i0, i0 + size] x [j0, j0 + size]"""

    i0: int
    j0: int
    size: int  # side in lattice intervals

    @property
    def block(self) -> Tuple[slice, slice]:
        return (slice(self.i0, self.i0 + self.size + 1), slice(self.j0, self.j0 + self.size + 1))

    @property
    def inner(self) -> Tuple[slice, slice]:
        """Nodes strictly inside"""
        return (slice(self.i0 + 1, self.i0 + self.size), slice(self.j0 + 1, self.j0 + self.size))

    def splittable(self) -> bool:
        return self.size % 2 == 0 and self.size // 2 >= settings.MIN_CELL_INTERVALS

    def children(self) -> List["Cell"]:
        half = self.size // 2
        return [
            Cell(self.i0 + di, self.j0 + dj, half)
            for di in (0, half)
            for dj in (0, half)
        ]

    def side(self, domain: GridDomain) -> float:
        return self.size * domain.h[0]

    def diameter(self, domain: GridDomain) -> float:
        return float(domain.norm.norm(np.array([self.side(domain), self.side(domain)])))

    def lower_corner(self, domain: GridDomain) -> np.ndarray:
        return np.array([domain.axes[0][self.i0], domain.axes[1][self.j0]])

    def fully_interior(self, domain: GridDomain) -> bool:
        return bool(domain.interior[self.inner].all() and domain.region[self.block].all())


@dataclass
class CellDecomposition:
    domain: GridDomain
    eps: float
    cells: List[Cell] = field(default_factory=list)
    collar: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))  # flat node indices
    ledger: CheckLedger = field(default_factory=CheckLedger)

    @property
    def collar_fraction(self) -> float:
        return float(self.collar.size) / float(self.domain.interior.sum())

    def cell_area(self) -> float:
        return float(sum(cell.side(self.domain) ** 2 for cell in self.cells))


def check_decomposition(decomposition: CellDecomposition) -> CheckLedger:
    """diam <= eps, disjoint interiors, at most 4 closures per node, coverage"""
    domain = decomposition.domain
    ledger = CheckLedger()
    inner_count = np.zeros(domain.shape, dtype=int)
    closure_count = np.zeros(domain.shape, dtype=int)
    worst_diameter = 0.0
    for cell in decomposition.cells:
        inner_count[cell.inner] += 1
        closure_count[cell.block] += 1
        worst_diameter = max(worst_diameter, cell.diameter(domain) - decomposition.eps)
    ledger.check_le("max (diam(C_j) - eps)", worst_diameter, 0.0, settings.TOLERANCE)
    ledger.check_le("max cells sharing an interior node", float(inner_count.max(initial=0)), 1.0, 0.0)
    ledger.check_le("max closures containing a node", float(closure_count.max(initial=0)), 4.0, 0.0)
    ledger.check_true(
        "every cell lies inside the domain",
        all(cell.fully_interior(domain) for cell in decomposition.cells),
    )
    covered = closure_count > 0
    uncovered = np.flatnonzero((domain.interior & ~covered).ravel())
    ledger.check_true("collar = uncovered interior nodes", np.array_equal(np.sort(decomposition.collar), uncovered))
    return ledger


def decompose(domain: GridDomain, eps: float) -> CellDecomposition:
    """
    Whitney-style split of the interior into squares of diameter <= eps

    Raises:
        DomainError: lattice is not square
        KernelUnderResolvedError: eps < 4h
    """
    if not domain.is_square_lattice:
        raise DomainError("cell decomposition needs a 2-D square lattice with equal mesh widths")
    if eps < 4.0 * domain.h_max * (1.0 - 1e-12):
        raise KernelUnderResolvedError(f"eps {eps:.6g} under-resolved: need eps >= 4h = {4.0 * domain.h_max:.6g}")

    accepted: List[Cell] = []
    queue = deque([Cell(0, 0, domain.shape[0] - 1)])
    while queue:
        cell = queue.popleft()
        if cell.fully_interior(domain) and cell.diameter(domain) <= eps * (1.0 + 1e-12):
            accepted.append(cell)
        elif cell.splittable():
            queue.extend(cell.children())

    accepted.sort(key=lambda c: (c.i0, c.j0))
    covered = np.zeros(domain.shape, dtype=bool)
    for cell in accepted:
        covered[cell.block] = True
    collar = np.flatnonzero((domain.interior & ~covered).ravel())

    decomposition = CellDecomposition(domain=domain, eps=float(eps), cells=accepted, collar=collar)
    decomposition.ledger = check_decomposition(decomposition)
    decomposition.ledger.require()
    logger.info(f"✅ Decomposed into {len(accepted)} cells, collar fraction {decomposition.collar_fraction:.4f}")
    return decomposition
