"""
Tests for the exhaustion schedule and the global approximation
"""
from itertools import count

import numpy as np
import pytest

from config import settings
from src.demo import demo_cloud, random_lipschitz_values
from src.errors import DomainError, PreconditionError
from src.extension import build_schedule, global_approx, stage_function
from src.extension import schedule as schedule_module
from src.metric import MetricSpace, ScalarField, lip_constant


# ============================================
# SCHEDULE
# ============================================

def test_stage_function_is_decreasing():
    values = [stage_function(lam, 0.3, 2.0) for lam in np.linspace(0.31, 0.999, 50)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_single_stage_solves_the_budget_equation():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0]])
    space = MetricSpace.from_points(coords)
    u0 = ScalarField(space, np.array([0.0, 0.2, 0.4, 0.4]))
    schedule = build_schedule(space, [0, 1], u0, K=1.0, eps=0.2, ball_step=10.0)

    assert len(schedule) == 1
    stage = schedule.stages[0]
    assert stage.D == pytest.approx(1.0 + 1.0)
    assert stage.budget == pytest.approx(0.1)
    assert stage.stage_value <= stage.budget + 1e-10
    assert stage_function(stage.lam, schedule.lambda0, stage.D) == pytest.approx(0.1, abs=1e-6)
    assert schedule.ledger.passed


def test_bisection_trace_tolerates_rounding_noise(monkeypatch):
    exact = schedule_module.stage_function
    calls = count()

    def jittered(lam, lam_prev, D):
        return exact(lam, lam_prev, D) + 1e-12 * (next(calls) % 2)

    monkeypatch.setattr(schedule_module, "stage_function", jittered)
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0]])
    space = MetricSpace.from_points(coords)
    u0 = ScalarField(space, np.array([0.0, 0.2, 0.4, 0.4]))
    schedule = build_schedule(space, [0, 1], u0, K=1.0, eps=0.2, ball_step=10.0)
    assert schedule.ledger.passed
    assert len(schedule) == 1


def test_schedule_is_empty_when_F_is_everything(small_cloud):
    n = small_cloud.space.n
    values = ScalarField(small_cloud.space, 0.5 * random_lipschitz_values(small_cloud.space, 1.0, np.random.default_rng(3)))
    schedule = build_schedule(small_cloud.space, np.arange(n), values, K=1.0, eps=0.1)
    assert len(schedule) == 0


def test_demo_schedule_slopes_and_budgets():
    cloud = demo_cloud(n=300, seed=0)
    schedule = build_schedule(cloud.space, cloud.boundary_indices, cloud.values, K=1.0, eps=0.1)

    assert schedule.stages[-1].indices.size == cloud.space.n
    slopes = schedule.lambda_n
    assert np.all(np.diff(slopes) > 0)
    assert slopes[-1] < 1.0
    assert schedule.budgets.sum() <= 0.1
    for stage in schedule.stages[:-1]:
        assert 1.0 - stage.lam >= settings.SCHEDULE_HEADROOM_FLOOR
    for stage in schedule.stages:
        assert stage.stage_value <= stage.budget + settings.SCHEDULE_SLACK
        assert np.all(np.isin(stage.previous, stage.indices))


def test_schedule_preconditions():
    coords = np.column_stack([np.arange(4.0), np.zeros(4)])
    space = MetricSpace.from_points(coords)
    u0 = ScalarField(space, np.arange(4.0))
    with pytest.raises(PreconditionError):
        build_schedule(space, [0, 3], u0, K=1.0, eps=0.1)
    with pytest.raises(DomainError):
        build_schedule(space, [0, 3], u0, K=2.0, eps=0.1, base_point=1)
    with pytest.raises(DomainError):
        build_schedule(space, [0, 3], u0, K=2.0, eps=0.0)


# ============================================
# GLOBAL APPROXIMATION
# ============================================

def test_demo_cloud_global_approximation():
    cloud = demo_cloud(n=300, seed=0)
    F = cloud.boundary_indices
    result = global_approx(cloud.space, F, cloud.values, 0.1, K=1.0)

    assert result.ledger.passed
    assert np.array_equal(result.u.at(F), cloud.values.at(F))
    assert result.sup_error <= 0.1 + 1e-9
    for stage, record in zip(result.schedule.stages, result.stages):
        assert record.lam < 1.0
        assert lip_constant(result.u, stage.indices).value <= record.lam + 1e-9


def test_default_K_is_the_measured_constant(small_cloud):
    F = small_cloud.boundary_indices
    result = global_approx(small_cloud.space, F, small_cloud.values, 0.05)
    assert result.schedule.K == pytest.approx(lip_constant(small_cloud.values).value)
    assert result.ledger.passed


def test_base_point_choice_keeps_the_guarantees(small_cloud):
    F = small_cloud.boundary_indices
    for p in F[:3]:
        result = global_approx(small_cloud.space, F, small_cloud.values, 0.1, K=1.0, base_point=int(p))
        assert result.schedule.p == p
        assert np.array_equal(result.u.at(F), small_cloud.values.at(F))


def test_seeded_global_approximation_suite():
    rng = np.random.default_rng(99)
    norms = ("l1", "l2", "linf")
    for k in range(100):
        n = int(rng.integers(5, 31))
        space = MetricSpace.from_points(rng.uniform(size=(n, 2)), norm=norms[k % 3])
        F = np.sort(rng.choice(n, size=int(rng.integers(1, n)), replace=False))
        u0 = ScalarField(space, 0.6 * random_lipschitz_values(space, 1.0, rng), name="u0")
        eps = float(rng.uniform(0.02, 0.5))

        result = global_approx(space, F, u0, eps, K=1.0)
        u = result.u
        assert result.ledger.passed, k
        assert np.array_equal(u.at(F), u0.at(F)), k
        assert np.max(np.abs(u.flat - u0.flat)) <= eps + 1e-9, k
        for stage in result.schedule.stages:
            assert stage.lam < 1.0, k
            assert lip_constant(u, stage.indices).value <= stage.lam + 1e-9, k
