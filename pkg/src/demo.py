"""
DEMO INSTANCES
==============
Seeded point clouds used by `--input demo`, the scripts and the tests.
"""

from typing import Optional

import numpy as np
from loguru import logger

from config import settings
from src.extension.transforms import ExtensionProblem, cone_envelope, inf_convolution, sup_convolution
from src.metric import MetricSpace, NormTag, ScalarField
from src.metric.io import PointCloud


def random_lipschitz_values(space: MetricSpace, lam: float, rng: np.random.Generator, n_anchors: int = 12) -> np.ndarray:
    """lam-Lipschitz field: inf-convolution of random data on random anchors"""
    n_anchors = min(n_anchors, space.n)
    anchors = rng.choice(space.n, size=n_anchors, replace=False)
    return cone_envelope(space, anchors, rng.uniform(-0.5, 0.5, size=n_anchors), lam, upper=True)


def boundary_band(coords: np.ndarray, width: float) -> np.ndarray:
    """Indices of points within `width` of the unit square's edges"""
    distance_to_edge = np.min(np.concatenate([coords, 1.0 - coords], axis=1), axis=1)
    return np.flatnonzero(distance_to_edge <= width)


def demo_cloud(
    n: int = 300,
    seed: Optional[int] = None,
    boundary_slope: float = 0.4,
    norm: "str | NormTag" = NormTag.L2,
    band: float = 0.08,
) -> PointCloud:
    """
    Seeded cloud in the unit square

    F (tag "boundary") is the band along the edges and carries
    boundary_slope-Lipschitz data; u0 is a 1-Lipschitz field on the whole
    cloud agreeing with that data on F.
    """
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    coords = rng.uniform(0.0, 1.0, size=(n, 2))
    space = MetricSpace.from_points(coords, norm=norm)

    F = boundary_band(coords, band)
    if F.size == 0:
        F = np.array([0])
    g = random_lipschitz_values(space, 1.0, rng)
    problem = ExtensionProblem(space=space, F=F, h=boundary_slope * g[F], lam=1.0)
    lower = sup_convolution(problem).flat
    upper = inf_convolution(problem).flat
    h = random_lipschitz_values(space, 1.0, rng)
    values = np.clip(h, lower, upper)
    values[F] = problem.h

    tags = np.full(n, "interior", dtype=object)
    tags[F] = "boundary"
    logger.debug(f"🎲 Demo cloud: n={n}, |F|={F.size}, seed={seed}")
    return PointCloud(space=space, values=ScalarField(space, values, name="u0"), tags=tags)
