"""
LIMITING CASE
=============
Boundary data u0(x, y) = |x| - |y| on the Euclidean unit circle, measured
in the ℓ1 norm. u0 is 1-Lipschitz on the circle and every 1-Lipschitz
extension is forced to equal |x| on the x-axis, so no extension is
differentiable at the origin. The ℓ∞ image under T(x, y) = (x + y, x - y)
reproduces the obstruction.

Both extremal extensions (sup- and inf-convolution, slope 1) are computed
on boundary samples ∪ axis samples; any extension lies between them.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from config import settings
from src.errors import DomainError
from src.extension import ExtensionProblem, inf_convolution, random_feasible_extensions, sup_convolution
from src.metric import MetricSpace, NormTag
from src.verification import CheckLedger

SLOPE_GAP_TOL = 0.1
ISOMETRY_TOL = 1e-12
T_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]])


@dataclass
class CaseResult:
    name: str
    norm: str
    axis_x: np.ndarray
    axis_upper: np.ndarray  # inf-convolution (largest extension)
    axis_lower: np.ndarray  # sup-convolution (smallest extension)
    kink_slopes: Dict[str, Tuple[float, float]]  # (left, right) per extension
    mesh: float
    verdict: bool
    isometry_error: Optional[float] = None
    ledger: CheckLedger = field(default_factory=CheckLedger)

    @property
    def slope_gap(self) -> float:
        return min(right - left for left, right in self.kink_slopes.values())

    @property
    def max_axis_error(self) -> float:
        target = np.abs(self.axis_x)
        return float(max(np.max(np.abs(self.axis_upper - target)), np.max(np.abs(self.axis_lower - target))))

    def as_record(self) -> dict:
        record = {
            "name": self.name,
            "norm": self.norm,
            "mesh": self.mesh,
            "max_axis_error": self.max_axis_error,
            "max_sandwich_gap": float(np.max(self.axis_upper - self.axis_lower)),
            "kink_slopes": {k: list(v) for k, v in self.kink_slopes.items()},
            "slope_gap": self.slope_gap,
            "verdict": self.verdict,
        }
        if self.isometry_error is not None:
            record["isometry_error"] = self.isometry_error
        return record


# ============================================
# SAMPLES
# ============================================

def circle_samples(n_boundary: int) -> np.ndarray:
    """n_boundary points on the unit circle; the four cardinal points are exact"""
    if n_boundary < 64:
        raise DomainError(f"boundary under-sampled: need n_boundary >= 64, got {n_boundary}")
    if n_boundary % 4:
        raise DomainError(f"n_boundary must be a multiple of 4 so the cardinal points are sampled, got {n_boundary}")
    theta = 2.0 * np.pi * np.arange(n_boundary) / n_boundary
    points = np.column_stack([np.cos(theta), np.sin(theta)])
    quarter = n_boundary // 4
    points[[0, quarter, 2 * quarter, 3 * quarter]] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    return points


def axis_samples(n_axis: int) -> np.ndarray:
    """Open-segment samples x_k = -1 + 2k/(n_axis - 1), endpoints dropped; n_axis odd keeps 0"""
    if n_axis < 5 or n_axis % 2 == 0:
        raise DomainError(f"n_axis must be odd and >= 5, got {n_axis}")
    return np.linspace(-1.0, 1.0, n_axis)[1:-1]


def boundary_data(points: np.ndarray) -> np.ndarray:
    return np.abs(points[:, 0]) - np.abs(points[:, 1])


def boundary_mesh(points: np.ndarray, norm: "str | NormTag") -> float:
    """Largest distance between consecutive boundary samples (cyclic)"""
    space = MetricSpace.from_points(points, norm=norm)
    n = points.shape[0]
    return float(np.max(space.pair_distances(np.arange(n), (np.arange(n) + 1) % n)))


def one_sided_slopes(axis_x: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """Difference quotients at the origin from the nearest axis samples"""
    zero = int(np.argmin(np.abs(axis_x)))
    left = (values[zero] - values[zero - 1]) / (axis_x[zero] - axis_x[zero - 1])
    right = (values[zero + 1] - values[zero]) / (axis_x[zero + 1] - axis_x[zero])
    return float(left), float(right)


# ============================================
# CASES
# ============================================

def _extremal_case(
    name: str,
    boundary: np.ndarray,
    axis_points: np.ndarray,
    axis_x: np.ndarray,
    norm: NormTag,
    mesh: float,
    n_feasible: int,
    rng: np.random.Generator,
    tol: float,
    n_jobs: Optional[int],
) -> CaseResult:
    n_b = boundary.shape[0]
    space = MetricSpace.from_points(np.vstack([boundary, axis_points]), norm=norm)
    F = np.arange(n_b)
    problem = ExtensionProblem(space=space, F=F, h=boundary_data_for(name, boundary), lam=1.0)

    ledger = CheckLedger()
    ledger.check_le("lip(u0, boundary samples)", problem.data_lipschitz(n_jobs=n_jobs), 1.0, tol)

    lower = sup_convolution(problem, tol=tol, n_jobs=n_jobs).flat
    upper = inf_convolution(problem, tol=tol, n_jobs=n_jobs).flat
    axis = np.arange(n_b, space.n)
    axis_lower, axis_upper = lower[axis], upper[axis]
    target = np.abs(axis_x)

    ledger.check_le("max |inf-convolution - |x|| on the axis", float(np.max(np.abs(axis_upper - target))), 2.0 * mesh, tol)
    ledger.check_le("max |sup-convolution - |x|| on the axis", float(np.max(np.abs(axis_lower - target))), 2.0 * mesh, tol)
    ledger.check_le("max (upper - lower) on the axis", float(np.max(axis_upper - axis_lower)), 4.0 * mesh, tol)
    origin = int(np.argmin(np.abs(axis_x)))
    ledger.check_le("u(0, 0) of the largest extension", float(axis_upper[origin]), 0.0, tol + 2.0 * mesh)

    for sample in random_feasible_extensions(problem, n_feasible, rng, n_jobs=n_jobs):
        ledger.check_le(f"{sample.name}: max (lower - f)", float(np.max(lower - sample.flat)), 0.0, tol)
        ledger.check_le(f"{sample.name}: max (f - upper)", float(np.max(sample.flat - upper)), 0.0, tol)

    kink_slopes = {
        "upper": one_sided_slopes(axis_x, axis_upper),
        "lower": one_sided_slopes(axis_x, axis_lower),
    }
    gap = min(right - left for left, right in kink_slopes.values())
    ledger.check_le("2 - one-sided slope gap at the origin", 2.0 - gap, SLOPE_GAP_TOL, 0.0)
    verdict = ledger.passed

    logger.info(f"{'✅' if verdict else '⚠️'} {name}: forced kink = {verdict}, slope gap {gap:.6f}, mesh {mesh:.3e}")
    return CaseResult(
        name=name,
        norm=norm.value,
        axis_x=axis_x,
        axis_upper=axis_upper,
        axis_lower=axis_lower,
        kink_slopes=kink_slopes,
        mesh=mesh,
        verdict=verdict,
        ledger=ledger,
    )


def boundary_data_for(name: str, boundary: np.ndarray) -> np.ndarray:
    """u0 on the samples; image samples are pulled back through T before evaluation"""
    if name == "linf-image":
        return boundary_data(image_inverse(boundary))
    return boundary_data(boundary)


def image_map(points: np.ndarray) -> np.ndarray:
    """T(x, y) = (x + y, x - y)"""
    return np.asarray(points, dtype=float) @ T_MATRIX.T


def image_inverse(points: np.ndarray) -> np.ndarray:
    return 0.5 * (np.asarray(points, dtype=float) @ T_MATRIX.T)


def l1_disc_case(
    n_boundary: int = 1024,
    n_axis: int = 201,
    n_feasible: int = 50,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> CaseResult:
    """
    Extremal 1-Lipschitz extensions of |x| - |y| from the circle, ℓ1 metric

    Raises:
        DomainError: n_boundary < 64 (or not a multiple of 4)
    """
    tol = settings.TOLERANCE if tol is None else tol
    rng = rng or np.random.default_rng(settings.SEED)
    boundary = circle_samples(n_boundary)
    axis_x = axis_samples(n_axis)
    axis_points = np.column_stack([axis_x, np.zeros_like(axis_x)])
    mesh = boundary_mesh(boundary, NormTag.L1)
    return _extremal_case("l1-disc", boundary, axis_points, axis_x, NormTag.L1, mesh, n_feasible, rng, tol, n_jobs)


def linf_image_case(
    n_boundary: int = 1024,
    n_axis: int = 201,
    n_feasible: int = 50,
    n_pairs: int = 1000,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> CaseResult:
    """
    Same instance pushed through T and rerun under ℓ∞; also checks that T
    is an isometry ℓ1 → ℓ∞ on random sample pairs
    """
    tol = settings.TOLERANCE if tol is None else tol
    rng = rng or np.random.default_rng(settings.SEED)
    boundary = circle_samples(n_boundary)
    axis_x = axis_samples(n_axis)
    axis_points = np.column_stack([axis_x, np.zeros_like(axis_x)])
    samples = np.vstack([boundary, axis_points])

    first = rng.integers(0, samples.shape[0], size=n_pairs)
    second = rng.integers(0, samples.shape[0], size=n_pairs)
    d1 = np.sum(np.abs(samples[first] - samples[second]), axis=1)
    images = image_map(samples)
    dinf = np.max(np.abs(images[first] - images[second]), axis=1)
    isometry_error = float(np.max(np.abs(dinf - d1)))

    image_boundary = image_map(boundary)
    mesh = boundary_mesh(image_boundary, NormTag.LINF)
    result = _extremal_case(
        "linf-image",
        image_boundary,
        image_map(axis_points),
        axis_x,
        NormTag.LINF,
        mesh,
        n_feasible,
        rng,
        tol,
        n_jobs,
    )
    result.isometry_error = isometry_error
    result.ledger.check_le("max |d_inf(Tp, Tq) - d_1(p, q)|", isometry_error, ISOMETRY_TOL, 0.0)
    east = boundary_data_for("linf-image", image_boundary[:1])
    result.ledger.check_le("|u0(T(1, 0)) - 1|", abs(float(east[0]) - 1.0), 0.0, tol)
    result.verdict = result.ledger.passed
    return result


# ============================================
# PLOT DATA
# ============================================

def write_axis_profile(path: "str | Path", result: CaseResult) -> Path:
    """Whitespace-separated columns: x upper lower abs_x"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            "x": result.axis_x,
            "upper": result.axis_upper,
            "lower": result.axis_lower,
            "abs_x": np.abs(result.axis_x),
        }
    )
    frame.to_csv(path, sep=" ", index=False, float_format="%.17g")
    logger.info(f"📄 Axis profile written to {path}")
    return path
