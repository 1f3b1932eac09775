"""
POINT CLOUD I/O
===============
- Point-cloud CSV: header `id,x1,...,xd,value,tag`, tag in {interior, boundary, none}
- Distance-matrix CSV: square, header row of ids
Every parse error carries the file path and the 1-based line number.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import InputError
from src.metric.fields import ScalarField
from src.metric.metric_space import MetricSpace, NormTag

VALID_TAGS = ("interior", "boundary", "none")
FLOAT_FORMAT = "%.17g"


@dataclass
class PointCloud:
    """Metric space + values + per-point tags"""

    space: MetricSpace
    values: ScalarField
    tags: np.ndarray

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.tags == "boundary")

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(self.tags == "interior")

    def __len__(self) -> int:
        return self.space.n


def _read_raw(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise InputError("file not found", path=str(path))
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise InputError(f"malformed CSV: {e}", path=str(path)) from e
    except pd.errors.EmptyDataError as e:
        raise InputError("empty file", path=str(path), line=1) from e


def _numeric_column(frame: pd.DataFrame, column: str, path: Path) -> np.ndarray:
    parsed = pd.to_numeric(frame[column], errors="coerce")
    bad = parsed.isna() | ~np.isfinite(parsed.to_numpy(dtype=float, na_value=np.nan))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise InputError(
            f"column '{column}' has non-numeric value {frame[column].iloc[row]!r}",
            path=str(path),
            line=row + 2,
        )
    return parsed.to_numpy(dtype=float)


def read_distance_matrix(path: "str | Path") -> Tuple[List[str], np.ndarray]:
    """
    Read a square distance-matrix CSV

    Returns:
        (ids from the header row, matrix)
    """
    path = Path(path)
    frame = _read_raw(path)
    ids = [str(c) for c in frame.columns]
    if frame.shape[0] != len(ids):
        raise InputError(
            f"distance matrix has {frame.shape[0]} rows for {len(ids)} header ids",
            path=str(path),
            line=min(frame.shape[0], len(ids)) + 2,
        )
    matrix = np.column_stack([_numeric_column(frame, c, path) for c in frame.columns])
    logger.debug(f"📄 Distance matrix loaded from {path} ({len(ids)} points)")
    return ids, matrix


def read_point_cloud(
    path: "str | Path",
    norm: "str | NormTag" = NormTag.L2,
    matrix_path: Optional["str | Path"] = None,
) -> PointCloud:
    """
    Read a point-cloud CSV

    Args:
        path: CSV with header id,x1..xd,value,tag
        norm: p-norm tag for coordinate distances
        matrix_path: optional distance matrix replacing the coordinates

    Returns:
        PointCloud
    """
    path = Path(path)
    frame = _read_raw(path)
    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    if len(columns) < 3 or columns[0] != "id" or columns[-2:] != ["value", "tag"]:
        raise InputError("header must be id,x1,...,xd,value,tag", path=str(path), line=1)
    coord_columns = columns[1:-2]
    for k, column in enumerate(coord_columns, start=1):
        if column != f"x{k}":
            raise InputError(f"coordinate column {k} must be named 'x{k}', got '{column}'", path=str(path), line=1)

    ids = frame["id"].astype(str).tolist()
    duplicated = pd.Series(ids).duplicated()
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise InputError(f"duplicate id {ids[row]!r}", path=str(path), line=row + 2)
    values = _numeric_column(frame, "value", path)
    tags = frame["tag"].str.strip().str.lower().to_numpy()
    for row, tag in enumerate(tags):
        if tag not in VALID_TAGS:
            raise InputError(f"unknown tag {tag!r} (expected {', '.join(VALID_TAGS)})", path=str(path), line=row + 2)

    if matrix_path is not None:
        matrix_ids, matrix = read_distance_matrix(matrix_path)
        if matrix_ids != ids:
            raise InputError("distance-matrix ids do not match point ids", path=str(matrix_path), line=1)
        space = MetricSpace.from_matrix(matrix, ids=ids)
    else:
        if not coord_columns:
            raise InputError("no coordinate columns and no distance matrix given", path=str(path), line=1)
        coords = np.column_stack([_numeric_column(frame, c, path) for c in coord_columns])
        space = MetricSpace.from_points(coords, norm=norm, ids=ids)

    field = ScalarField(space, values, name="u0")
    logger.info(f"📄 Point cloud loaded from {path}: {space.n} points, {int((tags == 'boundary').sum())} boundary")
    return PointCloud(space=space, values=field, tags=tags)


def write_point_field(
    path: "str | Path",
    space: MetricSpace,
    values: np.ndarray,
    tags: Optional[Sequence[str]] = None,
) -> Path:
    """Write a field in point-cloud CSV format (coordinates if the space has them)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {"id": space.ids}
    if space.coords is not None:
        for k in range(space.coords.shape[1]):
            data[f"x{k + 1}"] = space.coords[:, k]
    data["value"] = np.asarray(values, dtype=float)
    data["tag"] = list(tags) if tags is not None else ["none"] * space.n
    pd.DataFrame(data).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_distance_matrix(path: "str | Path", space: MetricSpace) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix = space.distances(space.all_indices, space.all_indices)
    pd.DataFrame(matrix, columns=space.ids).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path
