"""
LIPSCHITZ CONSTANTS AND SET METRICS
===================================
Exact pairwise computations on finite metric spaces:
- lip(f, S): max pairwise quotient, with a maximizing pair
- dist(x, B), dist(A, B), diam(A)
"""

from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config import settings
from src.errors import DomainError, InfiniteLipschitzError
from src.metric.fields import ScalarField
from src.metric.metric_space import MetricSpace, map_row_blocks


class LipschitzEstimate(NamedTuple):
    value: float
    witness: Tuple[int, int]


class SetMetrics(NamedTuple):
    dist_AB: float
    diam_A: float


def _as_subset(indices: Optional[Sequence[int]], space: MetricSpace) -> np.ndarray:
    if indices is None:
        return space.all_indices
    return np.unique(np.asarray(indices, dtype=int))


def lip_constant(
    f: ScalarField,
    S: Optional[Sequence[int]] = None,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> LipschitzEstimate:
    """
    Lipschitz constant of f on S

    Args:
        f: field on a MetricSpace (must be defined on S)
        S: index subset (default: where f is defined)
        tol: values closer than tol count as equal at zero distance
        n_jobs: parallelism width for row blocks

    Returns:
        (max over pairs i != j of |f(i)-f(j)| / d(i,j), maximizing pair)
    """
    tol = settings.TOLERANCE if tol is None else tol
    space = f.space
    S = f.defined_indices if S is None else _as_subset(S, space)
    if S.size == 0:
        raise DomainError("lip_constant needs a nonempty subset")
    values = f.at(S)
    position = {int(index): k for k, index in enumerate(S)}

    def block_max(rows: np.ndarray) -> Tuple[float, int, int]:
        D = space.distances(rows, S)
        row_values = values[[position[int(r)] for r in rows]]
        diff = np.abs(row_values[:, None] - values[None, :])
        zero = D <= 0.0
        same = rows[:, None] == S[None, :]
        clash = zero & ~same & (diff > tol)
        if np.any(clash):
            a, b = np.argwhere(clash)[0]
            raise InfiniteLipschitzError(int(rows[a]), int(S[b]), float(diff[a, b]))
        ratio = np.where(zero, 0.0, diff / np.where(zero, 1.0, D))
        k = int(np.argmax(ratio))
        a, b = divmod(k, ratio.shape[1])
        return float(ratio[a, b]), int(rows[a]), int(S[b])

    best = (0.0, int(S[0]), int(S[0]))
    for candidate in map_row_blocks(block_max, S, n_jobs=n_jobs):
        if candidate[0] > best[0]:
            best = candidate
    return LipschitzEstimate(best[0], (best[1], best[2]))


def dist_to_set(space: MetricSpace, x: int, B: Sequence[int]) -> float:
    """dist(x, B) = min over y in B of d(x, y)"""
    B = _as_subset(B, space)
    if B.size == 0:
        raise DomainError("dist_to_set needs a nonempty set B")
    return float(np.min(space.distances([x], B)))


def dist_to_set_many(space: MetricSpace, X: Sequence[int], B: Sequence[int], n_jobs: Optional[int] = None) -> np.ndarray:
    """dist(x, B) for every x in X"""
    B = _as_subset(B, space)
    if B.size == 0:
        raise DomainError("dist_to_set needs a nonempty set B")
    X = np.asarray(X, dtype=int)
    blocks = map_row_blocks(lambda rows: np.min(space.distances(rows, B), axis=1), X, n_jobs=n_jobs)
    return np.concatenate(blocks) if blocks else np.zeros(0)


def diameter(space: MetricSpace, A: Sequence[int]) -> float:
    """diam(A) = max over pairs in A"""
    A = _as_subset(A, space)
    if A.size == 0:
        raise DomainError("diameter of an empty set is undefined")
    return float(max(map_row_blocks(lambda rows: float(np.max(space.distances(rows, A))), A)))


def set_distance(space: MetricSpace, A: Sequence[int], B: Sequence[int]) -> float:
    """dist(A, B) = min over x in A, y in B"""
    A = _as_subset(A, space)
    B = _as_subset(B, space)
    if A.size == 0 or B.size == 0:
        raise DomainError("dist(A, B) needs both sets nonempty")
    return float(min(map_row_blocks(lambda rows: float(np.min(space.distances(rows, B))), A)))


def set_metrics(space: MetricSpace, A: Sequence[int], B: Sequence[int]) -> SetMetrics:
    """(dist(A, B), diam(A)) computed exactly"""
    return SetMetrics(dist_AB=set_distance(space, A, B), diam_A=diameter(space, A))
