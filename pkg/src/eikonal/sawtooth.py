"""
CELL SAWTOOTH
=============
On a cell C with mean gradient p the correction is

    u = min(s, t_left·d_left, t_right·d_right, t_bottom·d_bottom, t_top·d_top, cap)

where s is a periodic sawtooth along one axis with slopes a and -b, and
each face cone uses the slope that keeps its own gradient on the level
set ‖p + Du‖_* = 1 - ω. Only the cap plateau leaves the level set.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.optimize import bisect

from config import settings
from src.eikonal.cells import Cell
from src.errors import DomainError, SawtoothError
from src.metric import NormContext, ScalarField
from src.smoothing.grid import GridDomain

# branch codes
SAW_RISING, SAW_FALLING, FACE_LEFT, FACE_RIGHT, FACE_BOTTOM, FACE_TOP, PLATEAU = range(7)


def slope_root(p: np.ndarray, direction: np.ndarray, target: float, norm: NormContext) -> float:
    """
    Largest t >= 0 (to bisection accuracy, from below) with ‖p + t·direction‖_* <= target

    Raises:
        SawtoothError: ‖p‖_* already at or above the target
    """
    p = np.asarray(p, dtype=float)
    base = float(norm.dual_norm(p))
    if base >= target:
        raise SawtoothError(f"no slope root: ‖p‖_* = {base:.6g} >= target {target:.6g}")

    def residual(t: float) -> float:
        return float(norm.dual_norm(p + t * direction)) - target

    hi = target + base + 1.0
    root = bisect(residual, 0.0, hi, xtol=settings.BISECTION_XTOL)
    return max(0.0, root - settings.BISECTION_XTOL)


@dataclass
class CellSawtooth:
    cell: Cell
    values: np.ndarray  # on the cell block
    grad: np.ndarray  # (2, *block) analytic gradient of the active branch
    branch: np.ndarray
    axis: int
    a: float
    b: float
    face_slopes: Dict[str, float]
    period: float
    amplitude: float
    target: float
    omega: float

    @property
    def rho(self) -> float:
        """Fraction of strict-inside nodes where the sawtooth is clipped"""
        inner = self.branch[1:-1, 1:-1]
        return float(np.mean(inner >= FACE_LEFT)) if inner.size else 0.0

    @property
    def plateau_fraction(self) -> float:
        inner = self.branch[1:-1, 1:-1]
        return float(np.mean(inner == PLATEAU)) if inner.size else 0.0

    def to_field(self, domain: GridDomain) -> ScalarField:
        values = np.zeros(domain.shape)
        values[self.cell.block] = self.values
        mask = np.zeros(domain.shape, dtype=bool)
        mask[self.cell.block] = True
        return ScalarField(domain, values, mask=mask, name="u_cell")


def _axis_slopes(p: np.ndarray, target: float, norm: NormContext) -> Tuple[np.ndarray, np.ndarray]:
    """(a_k, b_k) per axis: ‖p + a_k e_k‖_* = ‖p - b_k e_k‖_* = target"""
    eye = np.eye(p.size)
    rising = np.array([slope_root(p, eye[k], target, norm) for k in range(p.size)])
    falling = np.array([slope_root(p, -eye[k], target, norm) for k in range(p.size)])
    return rising, falling


def cell_sawtooth(
    domain: GridDomain,
    cell: Cell,
    p: np.ndarray,
    amplitude_cap: float,
    omega: float = 0.0,
) -> CellSawtooth:
    """
    Sawtooth correction on one cell, zero on the cell boundary

    Args:
        domain: square-lattice domain
        cell: the cell
        p: mean gradient of the base field over the cell
        amplitude_cap: sup |u| bound
        omega: gradient oscillation of the base field over the cell; the
            level set is lowered to 1 - omega

    Raises:
        SawtoothError: ‖p‖_* too close to the lowered level
    """
    if amplitude_cap <= 0:
        raise DomainError(f"amplitude cap must be positive, got {amplitude_cap}")
    norm = domain.norm
    p = np.asarray(p, dtype=float)
    target = 1.0 - float(omega)
    if float(norm.dual_norm(p)) > target - settings.SAWTOOTH_MARGIN:
        raise SawtoothError(
            f"cell {cell}: ‖p‖_* = {float(norm.dual_norm(p)):.6g} leaves no room below level {target:.6g}"
        )

    rising, falling = _axis_slopes(p, target, norm)
    axis = int(np.argmax(np.minimum(rising, falling)))
    a, b = float(rising[axis]), float(falling[axis])
    h = domain.h[0]
    period = max(4.0 * h, amplitude_cap / max(a, b))
    peak_at = period * b / (a + b)

    lo = cell.lower_corner(domain)
    side = cell.side(domain)
    xs = domain.axes[0][cell.block[0]] - lo[0]
    ys = domain.axes[1][cell.block[1]] - lo[1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    local = (X, Y)

    y = np.mod(local[axis], period)
    up = y <= peak_at
    saw = np.where(up, a * y, b * (period - y))
    faces = {
        "left": (rising[0], X),
        "right": (falling[0], side - X),
        "bottom": (rising[1], Y),
        "top": (falling[1], side - Y),
    }
    candidates = np.stack(
        [saw]
        + [slope * np.maximum(dist, 0.0) for slope, dist in faces.values()]
        + [np.full_like(saw, amplitude_cap)],
        axis=0,
    )
    choice = np.argmin(candidates, axis=0)
    values = np.take_along_axis(candidates, choice[None, ...], axis=0)[0]

    branch = np.where(choice == 0, np.where(up, SAW_RISING, SAW_FALLING), choice + 1)
    e0, e1 = np.eye(2)
    branch_grads = {
        SAW_RISING: a * np.eye(2)[axis],
        SAW_FALLING: -b * np.eye(2)[axis],
        FACE_LEFT: rising[0] * e0,
        FACE_RIGHT: -falling[0] * e0,
        FACE_BOTTOM: rising[1] * e1,
        FACE_TOP: -falling[1] * e1,
        PLATEAU: np.zeros(2),
    }
    grad = np.zeros((2,) + values.shape)
    for code, g in branch_grads.items():
        grad[:, branch == code] = g[:, None]

    return CellSawtooth(
        cell=cell,
        values=values,
        grad=grad,
        branch=branch,
        axis=axis,
        a=a,
        b=b,
        face_slopes={name: float(slope) for name, (slope, _) in faces.items()},
        period=float(period),
        amplitude=float(values.max()),
        target=target,
        omega=float(omega),
    )
