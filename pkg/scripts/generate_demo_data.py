#!/usr/bin/env python3
"""
LIPSCHITZ TOOLKIT - DEMO DATA
=============================
Writes the seeded demo instances as input files, so every command can also
be run from disk (--input data/demo/...).
"""

import sys
from pathlib import Path

from loguru import logger

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from config import settings
from src.cli.instances import load_grid_field
from src.cli.schemas import RunConfig
from src.demo import demo_cloud
from src.metric import MetricSpace
from src.metric.io import write_distance_matrix, write_point_field
from src.smoothing import write_grid

OUT_DIR = PROJECT_ROOT / "data" / "demo"

GRIDS = [
    ("square", "linear", 129),
    ("square", "tent", 129),
    ("disc", "tent", 129),
    ("interval", "tent", 257),
]


def write_clouds(out_dir: Path) -> int:
    """Coordinate clouds in every norm, plus one matrix-only copy"""
    written = 0
    for norm in ("l1", "l2", "linf"):
        cloud = demo_cloud(n=300, seed=settings.SEED, norm=norm)
        path = write_point_field(out_dir / f"cloud_{norm}.csv", cloud.space, cloud.values.flat, cloud.tags)
        logger.info(f"💾 {path.name}")
        written += 1

    # same l2 instance without coordinates
    cloud = demo_cloud(n=120, seed=settings.SEED)
    matrix = write_distance_matrix(out_dir / "cloud_matrix.csv", cloud.space)
    stripped = MetricSpace.from_matrix(matrix_of(cloud.space), ids=cloud.space.ids)
    write_point_field(out_dir / "cloud_ids.csv", stripped, cloud.values.flat, cloud.tags)
    logger.info(f"💾 {matrix.name} + cloud_ids.csv")
    return written + 2


def matrix_of(space: MetricSpace):
    return space.distances(space.all_indices, space.all_indices)


def write_grids(out_dir: Path) -> int:
    for domain, data, n in GRIDS:
        config = RunConfig(command="smooth", domain=domain, data=data, n=n, out=str(out_dir))
        _, field = load_grid_field(config)
        path = write_grid(out_dir / f"{domain}_{data}.grid", field)
        logger.info(f"💾 {path.name}")
    return len(GRIDS)


def run_generate():
    logger.info(f"🚀 Writing demo instances to {OUT_DIR}")
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    try:
        n_files = write_clouds(OUT_DIR) + write_grids(OUT_DIR)
    except Exception as e:
        logger.error(f"❌ Error: {e}")
        return False
    logger.success(f"🎉 {n_files} files written")
    return True


if __name__ == "__main__":
    logger.remove()
    logger.add(sys.stderr, level="INFO", format="<green>{time:HH:mm:ss}</green> | <level>{message}</level>")
    sys.exit(0 if run_generate() else 1)
