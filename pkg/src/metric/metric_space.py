"""
METRIC SPACES AND NORMS
=======================
Finite metric spaces given either by coordinates + a p-norm tag
(p in {1, 2, inf}) or by an explicit symmetric distance matrix.

- Coordinate distances go through scipy's cdist
- Below DISTANCE_CACHE_LIMIT points the full matrix is cached,
  above it every block is computed on demand
- Row blocks can be evaluated in parallel (joblib, thread backend);
  results are concatenated in block order so the width never changes them
"""

from enum import Enum
from functools import cached_property
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from scipy.spatial.distance import cdist

from config import settings
from src.errors import DomainError, InputError
from src.verification import CheckLedger

T = TypeVar("T")


# ============================================
# NORMS
# ============================================

class NormTag(str, Enum):
    """p-norm tags"""

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, tag: "str | NormTag") -> "NormTag":
        if isinstance(tag, NormTag):
            return tag
        aliases = {
            "l1": cls.L1, "1": cls.L1, "manhattan": cls.L1,
            "l2": cls.L2, "2": cls.L2, "euclidean": cls.L2,
            "linf": cls.LINF, "inf": cls.LINF, "max": cls.LINF,
        }
        key = str(tag).strip().lower()
        if key not in aliases:
            raise InputError(f"unknown norm tag '{tag}' (expected one of l1, l2, linf)")
        return aliases[key]

    @property
    def dual(self) -> "NormTag":
        return {NormTag.L1: NormTag.LINF, NormTag.L2: NormTag.L2, NormTag.LINF: NormTag.L1}[self]

    @property
    def order(self) -> float:
        return {NormTag.L1: 1, NormTag.L2: 2, NormTag.LINF: np.inf}[self]

    @property
    def cdist_metric(self) -> str:
        return {NormTag.L1: "cityblock", NormTag.L2: "euclidean", NormTag.LINF: "chebyshev"}[self]


class NormContext:
    """
    Ambient norm ‖·‖ (exponent p) and its dual ‖·‖_* (exponent q)
    """

    def __init__(self, p: "str | NormTag" = NormTag.L2):
        self.p = NormTag.parse(p)
        self.q = self.p.dual

    def __repr__(self) -> str:
        return f"NormContext(p={self.p.value}, q={self.q.value})"

    def norm(self, vectors: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.linalg.norm(np.asarray(vectors, dtype=float), ord=self.p.order, axis=axis)

    def dual_norm(self, covectors: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.linalg.norm(np.asarray(covectors, dtype=float), ord=self.q.order, axis=axis)

    def maximizing_direction(self, g: np.ndarray) -> np.ndarray:
        """Unit p-norm direction attaining ⟨g, dir⟩ = ‖g‖_*"""
        g = np.asarray(g, dtype=float)
        direction = np.zeros_like(g)
        if not np.any(g):
            direction[0] = 1.0
            return direction
        if self.p is NormTag.L1:
            i = int(np.argmax(np.abs(g)))
            direction[i] = np.sign(g[i])
        elif self.p is NormTag.L2:
            direction = g / np.linalg.norm(g)
        else:
            direction = np.where(g >= 0, 1.0, -1.0)
        return direction

    def unit_directions(self, d: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """n random directions on the unit p-sphere of R^d"""
        raw = rng.standard_normal((n, d))
        raw[np.all(raw == 0, axis=1)] = 1.0
        return raw / self.norm(raw)[:, None]

    def check_dual_pairing(
        self,
        g: np.ndarray,
        rng: np.random.Generator,
        n_samples: int = 256,
        tol: Optional[float] = None,
    ) -> CheckLedger:
        """
        ‖g‖_* equals the supremum of ⟨g, dir⟩ over unit p-directions: no sampled
        direction exceeds it and the maximizing direction attains it
        """
        tol = settings.TOLERANCE if tol is None else tol
        g = np.asarray(g, dtype=float)
        dual = float(self.dual_norm(g))
        sample = self.unit_directions(g.size, n_samples, rng)
        best_sampled = float(np.max(sample @ g)) if n_samples else -np.inf
        attained = float(self.maximizing_direction(g) @ g)

        ledger = CheckLedger()
        ledger.check_le("sampled pairing <= dual norm", best_sampled, dual, tol)
        ledger.check_le("dual norm - attained pairing", abs(dual - attained), 0.0, tol)
        return ledger


# ============================================
# PARALLEL BLOCKS
# ============================================

def map_row_blocks(
    func: Callable[[np.ndarray], T],
    rows: np.ndarray,
    block_size: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> List[T]:
    """
    Apply func to consecutive row blocks; results come back in block order
    """
    rows = np.asarray(rows, dtype=int)
    block_size = block_size or settings.BLOCK_SIZE
    blocks = [rows[start:start + block_size] for start in range(0, len(rows), block_size)]
    width = settings.worker_count(n_jobs)
    if width == 1 or len(blocks) <= 1:
        return [func(block) for block in blocks]
    return Parallel(n_jobs=width, prefer="threads")(delayed(func)(block) for block in blocks)


# ============================================
# METRIC SPACE
# ============================================

class MetricSpace:
    """
    Finite metric space over point indices 0..n-1
    """

    def __init__(
        self,
        coords: Optional[np.ndarray] = None,
        norm: "str | NormTag | None" = None,
        matrix: Optional[np.ndarray] = None,
        ids: Optional[Sequence[str]] = None,
    ):
        """
        Initialize metric space

        Args:
            coords: (n, d) coordinates, used with a norm tag
            norm: p-norm tag applied to coordinate differences
            matrix: explicit symmetric (n, n) distance matrix
            ids: optional point identifiers (default: "0".."n-1")
        """
        if (coords is None) == (matrix is None):
            raise DomainError("metric space needs exactly one of coordinates or a distance matrix")

        self.coords: Optional[np.ndarray] = None
        self.matrix: Optional[np.ndarray] = None
        self.norm_context: Optional[NormContext] = None

        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            if not np.all(np.isfinite(coords)):
                raise DomainError("coordinates must be finite")
            self.coords = coords
            self.norm_context = NormContext(norm or NormTag.L2)
            n = coords.shape[0]
        else:
            matrix = np.asarray(matrix, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise DomainError(f"distance matrix must be square, got shape {matrix.shape}")
            self.matrix = matrix
            if norm is not None:
                self.norm_context = NormContext(norm)
            n = matrix.shape[0]

        self.n = int(n)
        self.ids: List[str] = [str(i) for i in ids] if ids is not None else [str(i) for i in range(self.n)]
        if len(self.ids) != self.n:
            raise DomainError(f"{len(self.ids)} ids for {self.n} points")

    # ============================================
    # CONSTRUCTORS
    # ============================================

    @classmethod
    def from_points(cls, coords: np.ndarray, norm: "str | NormTag" = NormTag.L2, ids=None) -> "MetricSpace":
        return cls(coords=coords, norm=norm, ids=ids)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, ids=None) -> "MetricSpace":
        return cls(matrix=matrix, ids=ids)

    def subspace(self, indices: Sequence[int]) -> "MetricSpace":
        """Restriction of the metric to the given indices (re-indexed 0..k-1)"""
        indices = np.asarray(indices, dtype=int)
        ids = [self.ids[i] for i in indices]
        if self.coords is not None:
            return MetricSpace(coords=self.coords[indices], norm=self.norm_context.p, ids=ids)
        return MetricSpace(matrix=self.matrix[np.ix_(indices, indices)], ids=ids)

    # ============================================
    # DISTANCES
    # ============================================

    @property
    def shape(self) -> tuple:
        return (self.n,)

    @property
    def all_indices(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def is_cached(self) -> bool:
        return self.matrix is not None or self.n <= settings.DISTANCE_CACHE_LIMIT

    @cached_property
    def _cached_matrix(self) -> np.ndarray:
        logger.debug(f"📐 Caching {self.n}x{self.n} distance matrix")
        return cdist(self.coords, self.coords, metric=self.norm_context.p.cdist_metric)

    def distances(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Block of distances d(rows[i], cols[j])"""
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        if self.matrix is not None:
            return self.matrix[np.ix_(rows, cols)]
        if self.n <= settings.DISTANCE_CACHE_LIMIT:
            return self._cached_matrix[np.ix_(rows, cols)]
        return cdist(self.coords[rows], self.coords[cols], metric=self.norm_context.p.cdist_metric)

    def pair_distances(self, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
        """Elementwise d(a[k], b[k])"""
        a = np.asarray(a, dtype=int)
        b = np.asarray(b, dtype=int)
        if self.matrix is not None:
            return self.matrix[a, b]
        return self.norm_context.norm(self.coords[a] - self.coords[b])

    def distance(self, i: int, j: int) -> float:
        return float(self.pair_distances([i], [j])[0])

    # ============================================
    # AXIOMS
    # ============================================

    def validate(self, tol: Optional[float] = None, rng: Optional[np.random.Generator] = None) -> CheckLedger:
        """
        Check metric axioms: zero diagonal, symmetry, nonnegativity, triangle
        inequality (exhaustive up to TRIANGLE_EXHAUSTIVE_LIMIT points, sampled above)
        """
        tol = settings.TOLERANCE if tol is None else tol
        ledger = CheckLedger()
        idx = self.all_indices

        if self.n <= settings.TRIANGLE_EXHAUSTIVE_LIMIT:
            D = self.distances(idx, idx)
            ledger.check_le("max |d(i,i)|", float(np.max(np.abs(np.diag(D)))) if self.n else 0.0, 0.0, tol)
            ledger.check_le("max |d(i,j) - d(j,i)|", float(np.max(np.abs(D - D.T))) if self.n else 0.0, 0.0, tol)
            ledger.check_le("max -d(i,j)", float(np.max(-D)) if self.n else 0.0, 0.0, tol)
            worst = 0.0
            for j in range(self.n):
                excess = D - (D[:, j:j + 1] + D[j:j + 1, :])
                worst = max(worst, float(np.max(excess)))
            ledger.check_le("triangle excess d(i,k) - d(i,j) - d(j,k)", worst, 0.0, tol)
        else:
            rng = rng or np.random.default_rng(settings.SEED)
            m = settings.TRIANGLE_SAMPLES
            i, j, k = (rng.integers(0, self.n, size=m) for _ in range(3))
            ledger.check_le("max |d(i,i)|", float(np.max(np.abs(self.pair_distances(i, i)))), 0.0, tol)
            ledger.check_le(
                "max |d(i,j) - d(j,i)|",
                float(np.max(np.abs(self.pair_distances(i, j) - self.pair_distances(j, i)))),
                0.0,
                tol,
            )
            ledger.check_le("max -d(i,j)", float(np.max(-self.pair_distances(i, j))), 0.0, tol)
            excess = self.pair_distances(i, k) - self.pair_distances(i, j) - self.pair_distances(j, k)
            ledger.check_le("triangle excess d(i,k) - d(i,j) - d(j,k)", float(np.max(excess)), 0.0, tol)
        return ledger

    def __repr__(self) -> str:
        kind = f"norm={self.norm_context.p.value}, d={self.coords.shape[1]}" if self.coords is not None else "matrix"
        return f"MetricSpace(n={self.n}, {kind})"
