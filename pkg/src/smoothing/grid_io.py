"""
GRID FILES
==========
Structured text format:

    d 2
    box 0 1 0 1
    h 0.25 0.25
    shape 5 5
    norm l2
    value,mask
    <value>,<I|B|E>     (one line per node, row-major)

Emitted fields use the same format; values are written with %.17g.
"""

from io import StringIO
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from src.errors import InputError
from src.metric import ScalarField
from src.smoothing.grid import GridDomain

HEADER_KEYS = ("d", "box", "h", "shape", "norm")
MASK_CODES = {"I": 0, "B": 1, "E": 2}


def write_grid(path: "str | Path", field: ScalarField) -> Path:
    """Write a grid field with its domain header"""
    domain: GridDomain = field.space
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    codes = np.where(domain.interior, "I", np.where(domain.boundary, "B", "E")).ravel()
    lines = [
        f"d {domain.d}",
        "box " + " ".join(f"{v:.17g}" for lo_hi in domain.box for v in lo_hi),
        "h " + " ".join(f"{v:.17g}" for v in domain.h),
        "shape " + " ".join(str(n) for n in domain.shape),
        f"norm {domain.norm.p.value}",
        "value,mask",
    ]
    lines.extend(f"{value:.17g},{code}" for value, code in zip(field.values.ravel(), codes))
    path.write_text("\n".join(lines) + "\n")
    return path


def _header_value(line: str, key: str, path: Path, number: int) -> list:
    parts = line.split()
    if not parts or parts[0] != key:
        raise InputError(f"expected header '{key}', got {line.strip()!r}", path=str(path), line=number)
    return parts[1:]


def read_grid(path: "str | Path") -> Tuple[GridDomain, ScalarField]:
    """
    Read a grid file

    Returns:
        (domain with the stored masks, field)

    Raises:
        InputError: malformed header or body, with the offending line number
    """
    path = Path(path)
    if not path.exists():
        raise InputError("file not found", path=str(path))
    lines = path.read_text().splitlines()
    if len(lines) < len(HEADER_KEYS) + 1:
        raise InputError("truncated grid header", path=str(path), line=len(lines) + 1)

    try:
        d = int(_header_value(lines[0], "d", path, 1)[0])
        box_values = [float(v) for v in _header_value(lines[1], "box", path, 2)]
        _header_value(lines[2], "h", path, 3)
        shape = tuple(int(v) for v in _header_value(lines[3], "shape", path, 4))
        norm = _header_value(lines[4], "norm", path, 5)[0]
    except (ValueError, IndexError) as e:
        raise InputError(f"malformed grid header: {e}", path=str(path)) from e
    if len(box_values) != 2 * d or len(shape) != d:
        raise InputError(f"header sizes do not match d={d}", path=str(path), line=2)
    if lines[5].strip() != "value,mask":
        raise InputError("expected column header 'value,mask'", path=str(path), line=6)

    body = pd.read_csv(StringIO("\n".join(lines[5:])), dtype=str, keep_default_na=False)
    expected = int(np.prod(shape))
    if len(body) != expected:
        raise InputError(f"{len(body)} node rows for shape {shape} ({expected} nodes)", path=str(path), line=6 + min(len(body), expected) + 1)

    values = pd.to_numeric(body["value"], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise InputError(f"non-numeric node value {body['value'].iloc[row]!r}", path=str(path), line=row + 7)
    codes = body["mask"].str.strip().to_numpy()
    unknown = ~np.isin(codes, list(MASK_CODES))
    if unknown.any():
        row = int(np.flatnonzero(unknown)[0])
        raise InputError(f"unknown mask code {codes[row]!r} (expected I, B or E)", path=str(path), line=row + 7)

    box = [(box_values[2 * k], box_values[2 * k + 1]) for k in range(d)]
    region = (codes != "E").reshape(shape)
    domain = GridDomain(box, shape, region=region, norm=norm)
    stored_interior = (codes == "I").reshape(shape)
    if not np.array_equal(stored_interior, domain.interior):
        mismatch = int(np.flatnonzero((stored_interior != domain.interior).ravel())[0])
        raise InputError("stored interior/boundary masks are inconsistent with the region", path=str(path), line=mismatch + 7)
    return domain, ScalarField(domain, values.reshape(shape), name=path.stem)
