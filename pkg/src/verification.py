"""
VERIFICATION LEDGER
===================
Every certified inequality is recorded as an InequalityCheck carrying the
measured left side, the bound and the margin. Operations collect them in a
CheckLedger and return the ledger with their results; reports and the
`verify` command read the same records.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from loguru import logger

from config import settings
from src.errors import InvariantViolation


@dataclass(frozen=True)
class InequalityCheck:
    """measured <= bound (+ tol)"""

    name: str
    measured: float
    bound: float
    tol: float = 0.0

    @property
    def margin(self) -> float:
        return float(self.bound - self.measured)

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.bound + self.tol)

    def describe(self) -> str:
        relation = "<=" if self.passed else ">"
        return (
            f"{self.name}: measured {self.measured:.12g} {relation} bound {self.bound:.12g} "
            f"(margin {self.margin:.6g}, tol {self.tol:.1e})"
        )

    def as_record(self) -> Dict:
        return {
            "name": self.name,
            "measured": float(self.measured),
            "bound": float(self.bound),
            "margin": self.margin,
            "tol": float(self.tol),
            "passed": self.passed,
        }


@dataclass
class CheckLedger:
    """Ordered collection of inequality checks"""

    checks: List[InequalityCheck] = field(default_factory=list)

    def check_le(self, name: str, measured: float, bound: float, tol: Optional[float] = None) -> InequalityCheck:
        """Record measured <= bound; tolerance defaults to settings.TOLERANCE"""
        check = InequalityCheck(
            name=name,
            measured=float(measured),
            bound=float(bound),
            tol=settings.TOLERANCE if tol is None else float(tol),
        )
        self.checks.append(check)
        if not check.passed:
            logger.debug(f"⚠️ {check.describe()}")
        return check

    def check_true(self, name: str, condition: bool) -> InequalityCheck:
        """Record a boolean condition as 0 <= 0 (pass) or 1 <= 0 (fail)"""
        return self.check_le(name, 0.0 if condition else 1.0, 0.0, tol=0.0)

    def extend(self, other: "CheckLedger", prefix: str = "") -> None:
        for check in other.checks:
            self.checks.append(
                InequalityCheck(f"{prefix}{check.name}", check.measured, check.bound, check.tol)
            )

    @property
    def failures(self) -> List[InequalityCheck]:
        return [check for check in self.checks if not check.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def require(self) -> None:
        """Raise the first failing check"""
        failures = self.failures
        if failures:
            raise InvariantViolation(failures[0])

    def as_records(self) -> List[Dict]:
        return [check.as_record() for check in self.checks]

    def __iter__(self) -> Iterable[InequalityCheck]:
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)
