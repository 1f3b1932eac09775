"""
SCALAR FIELDS
=============
Real values attached to the points of a MetricSpace or the nodes of a
GridDomain. A field may be defined on a subset only (mask).
"""

from typing import Any, Optional, Sequence

import numpy as np

from src.errors import DomainError


class ScalarField:
    """
    Values on a space; `mask` marks where the field is defined
    """

    def __init__(self, space: Any, values: np.ndarray, mask: Optional[np.ndarray] = None, name: str = "f"):
        values = np.array(values, dtype=float)
        shape = tuple(space.shape)
        if values.shape != shape:
            if values.size == int(np.prod(shape)):
                values = values.reshape(shape)
            else:
                raise DomainError(f"field '{name}' has shape {values.shape}, space expects {shape}")
        if mask is None:
            mask = np.ones(shape, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool).reshape(shape)

        if not np.all(np.isfinite(values[mask])):
            raise DomainError(f"field '{name}' has non-finite values")
        values = np.where(mask, values, 0.0)

        self.space = space
        self.values = values
        self.mask = mask
        self.name = name

    # ============================================
    # CONSTRUCTORS
    # ============================================

    @classmethod
    def on_subset(cls, space: Any, indices: Sequence[int], values: Sequence[float], name: str = "f") -> "ScalarField":
        """Field defined on flat indices only"""
        indices = np.asarray(indices, dtype=int)
        values = np.asarray(values, dtype=float).ravel()
        if indices.shape[0] != values.shape[0]:
            raise DomainError(f"{values.shape[0]} values for {indices.shape[0]} indices")
        full = np.zeros(int(np.prod(space.shape)))
        mask = np.zeros(int(np.prod(space.shape)), dtype=bool)
        full[indices] = values
        mask[indices] = True
        return cls(space, full, mask, name=name)

    @classmethod
    def constant(cls, space: Any, value: float, name: str = "f") -> "ScalarField":
        return cls(space, np.full(tuple(space.shape), float(value)), name=name)

    # ============================================
    # ACCESS
    # ============================================

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @property
    def defined_indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask.ravel())

    @property
    def is_total(self) -> bool:
        return bool(np.all(self.mask))

    def at(self, indices: Sequence[int]) -> np.ndarray:
        """Values at flat indices (all must be defined)"""
        indices = np.asarray(indices, dtype=int)
        if not np.all(self.mask.ravel()[indices]):
            raise DomainError(f"field '{self.name}' is undefined at some requested indices")
        return self.values.ravel()[indices]

    def restrict(self, indices: Sequence[int], name: Optional[str] = None) -> "ScalarField":
        return ScalarField.on_subset(self.space, indices, self.at(indices), name=name or self.name)

    def with_values(self, values: np.ndarray, name: Optional[str] = None) -> "ScalarField":
        return ScalarField(self.space, values, self.mask, name=name or self.name)

    def scaled(self, factor: float, name: Optional[str] = None) -> "ScalarField":
        return self.with_values(self.values * float(factor), name=name)

    def sup_distance(self, other: "ScalarField", indices: Optional[Sequence[int]] = None) -> float:
        """max |self - other| over indices (default: where both are defined)"""
        if indices is None:
            indices = np.flatnonzero((self.mask & other.mask).ravel())
        indices = np.asarray(indices, dtype=int)
        if indices.size == 0:
            return 0.0
        return float(np.max(np.abs(self.at(indices) - other.at(indices))))

    def __neg__(self) -> "ScalarField":
        return self.with_values(-self.values)

    def __len__(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"ScalarField(name={self.name!r}, shape={self.values.shape}, defined={int(self.mask.sum())})"
