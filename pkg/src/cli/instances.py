"""
Input instances: point clouds (file or seeded demo) and grid fields
(file or built-in domain + data)
"""
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np

from src.cli.schemas import RunConfig
from src.demo import demo_cloud
from src.errors import DomainError
from src.metric import ScalarField
from src.metric.io import PointCloud, read_point_cloud, write_distance_matrix, write_point_field
from src.smoothing import GridDomain, read_grid

# functions of coordinates centred on the box midpoint
GRID_DATA: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "linear": lambda X, Y: 0.5 * X,
    "tent": lambda X, Y: 0.4 * (np.abs(X) - np.abs(Y)),
    "zero": lambda X, Y: np.zeros_like(X),
}


def load_cloud(config: RunConfig) -> PointCloud:
    if config.input is None or config.input == "demo":
        return demo_cloud(n=config.demo_size, seed=config.seed, norm=config.norm)
    cloud = read_point_cloud(config.input, norm=config.norm, matrix_path=config.matrix)
    if cloud.boundary_indices.size == 0:
        raise DomainError(f"{config.input}: no points tagged 'boundary'")
    return cloud


def save_cloud(out_dir: Path, cloud: PointCloud) -> Dict[str, str]:
    """Copy of the input next to the report, so verify needs nothing else"""
    artifacts = {"input": str(write_point_field(out_dir / "input.csv", cloud.space, cloud.values.flat, cloud.tags).name)}
    if cloud.space.coords is None:
        artifacts["matrix"] = str(write_distance_matrix(out_dir / "matrix.csv", cloud.space).name)
    return artifacts


def load_saved_cloud(out_dir: Path, report: dict) -> PointCloud:
    artifacts = report["artifacts"]
    matrix = out_dir / artifacts["matrix"] if "matrix" in artifacts else None
    return read_point_cloud(out_dir / artifacts["input"], norm=report["config"]["norm"], matrix_path=matrix)


def build_domain(config: RunConfig) -> GridDomain:
    if config.domain == "interval":
        return GridDomain.interval(-1.0, 1.0, n=config.n, norm=config.norm)
    if config.domain == "disc":
        return GridDomain.disc(1.0, n=config.n, norm=config.norm)
    return GridDomain.square(0.0, 1.0, n=config.n, norm=config.norm)


def load_grid_field(config: RunConfig) -> Tuple[GridDomain, ScalarField]:
    """Grid file from --input, else the built-in domain sampled with --data"""
    if config.input is not None and config.input != "demo":
        return read_grid(config.input)
    domain = build_domain(config)
    func = GRID_DATA[config.data]
    center = [0.5 * (lo + hi) for lo, hi in domain.box]
    if domain.d == 1:
        field = domain.sample(lambda X: func(X - center[0], np.zeros_like(X)), name=config.data)
    else:
        field = domain.sample(lambda X, Y: func(X - center[0], Y - center[1]), name=config.data)
    return domain, field.with_values(np.where(domain.region, field.values, 0.0))
