"""
Tests for the verification ledger and the error hierarchy
"""
import pytest

from src.errors import (
    DomainError,
    HypothesisViolation,
    InputError,
    InvariantViolation,
    LipschitzToolkitError,
    PreconditionError,
)
from src.verification import CheckLedger, InequalityCheck


def test_check_margin_and_pass():
    check = InequalityCheck("lip", measured=0.7, bound=1.0, tol=0.0)
    assert check.passed
    assert check.margin == pytest.approx(0.3)
    record = check.as_record()
    assert record["measured"] == 0.7 and record["bound"] == 1.0 and record["passed"] is True


def test_tolerance_admits_small_excess():
    assert InequalityCheck("x", 1.0 + 1e-10, 1.0, tol=1e-9).passed
    assert not InequalityCheck("x", 1.0 + 1e-8, 1.0, tol=1e-9).passed


def test_ledger_require_raises_first_failure():
    ledger = CheckLedger()
    ledger.check_le("fine", 0.0, 1.0)
    ledger.check_le("first bad", 2.0, 1.0, tol=0.0)
    ledger.check_le("second bad", 3.0, 1.0, tol=0.0)
    assert not ledger.passed
    assert len(ledger.failures) == 2
    with pytest.raises(InvariantViolation) as info:
        ledger.require()
    assert "first bad" in str(info.value)
    assert info.value.check.name == "first bad"


def test_check_true_and_extend_prefix():
    inner = CheckLedger()
    inner.check_true("holds", True)
    inner.check_true("fails", False)
    outer = CheckLedger()
    outer.extend(inner, prefix="stage 1: ")
    assert [check.name for check in outer] == ["stage 1: holds", "stage 1: fails"]
    assert len(outer) == 2 and not outer.passed


def test_error_hierarchy():
    check = InequalityCheck("lip(u0, ∂Ω)", 1.2, 1.0)
    assert issubclass(DomainError, ValueError)
    assert isinstance(PreconditionError(check), DomainError)
    assert "precondition failed" in str(PreconditionError(check, "hint"))
    violation = HypothesisViolation(check, (3, 4))
    assert isinstance(violation, InvariantViolation)
    assert "(3, 4)" in str(violation)
    error = InputError("bad value", path="cloud.csv", line=7)
    assert str(error).startswith("cloud.csv:7:")
    assert isinstance(error, LipschitzToolkitError)
