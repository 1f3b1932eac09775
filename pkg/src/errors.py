"""
TOOLKIT ERRORS
==============
Exception hierarchy shared by every module.

- DomainError: an argument outside its documented domain
- InputError: malformed files, unknown tags, missing artifacts
- InvariantViolation: a certified inequality failed at run time
"""

from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from src.verification import InequalityCheck


class LipschitzToolkitError(Exception):
    """Base class for every toolkit error"""


# ============================================
# DOMAIN ERRORS
# ============================================

class DomainError(LipschitzToolkitError, ValueError):
    """Argument outside the operation's domain"""


class InfiniteLipschitzError(DomainError):
    """Two distinct points at distance 0 carry different values"""

    def __init__(self, i: int, j: int, gap: float):
        self.pair = (i, j)
        self.gap = gap
        super().__init__(
            f"infinite Lipschitz constant: points {i} and {j} are at distance 0 "
            f"with values differing by {gap:.3e}"
        )


class EmptyConstraintFamilyError(DomainError):
    """The constrained Lipschitz family has no member"""

    def __init__(self, precondition: str, detail: str = ""):
        self.precondition = precondition
        message = f"empty constraint family: violated precondition '{precondition}'"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class PreconditionError(DomainError):
    """A measured precondition of an operation does not hold; the run is refused"""

    def __init__(self, check: "InequalityCheck", hint: str = ""):
        self.check = check
        message = f"precondition failed: {check.describe()}"
        if hint:
            message = f"{hint}: {message}"
        super().__init__(message)


class KernelUnderResolvedError(DomainError):
    """Kernel or radius field too small for the lattice"""


class ScheduleError(DomainError):
    """The slope schedule cannot be built"""


# ============================================
# INPUT ERRORS
# ============================================

class InputError(LipschitzToolkitError):
    """Malformed or missing input"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


# ============================================
# INVARIANT FAILURES
# ============================================

class InvariantViolation(LipschitzToolkitError, AssertionError):
    """A checked inequality failed"""

    def __init__(self, check: "InequalityCheck"):
        self.check = check
        super().__init__(check.describe())


class HypothesisViolation(InvariantViolation):
    """Eikonal hypothesis (A) fails at some node"""

    def __init__(self, check: "InequalityCheck", node: tuple):
        self.node = node
        super().__init__(check)
        self.args = (f"{check.describe()} at node {node}",)


class CellRefinementError(InvariantViolation):
    """Gradient oscillation stays too large after refinement to the minimum cell"""


class SawtoothError(LipschitzToolkitError):
    """The per-cell slope equations have no admissible root"""
