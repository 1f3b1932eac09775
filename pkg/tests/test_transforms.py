"""
Tests for the extremal extensions and the constrained maximum
"""
import numpy as np
import pytest

from src.errors import DomainError, EmptyConstraintFamilyError
from src.extension import (
    ExtensionProblem,
    UpperBound,
    constrained_max_lipschitz,
    inf_convolution,
    midpoint_extension,
    random_feasible_extensions,
    sup_convolution,
)
from src.metric import MetricSpace, lip_constant


@pytest.fixture
def line4():
    """Four points 0, 1, 2, 3 on a line, data at the ends"""
    coords = np.column_stack([np.arange(4.0), np.zeros(4)])
    return MetricSpace.from_points(coords, norm="l2")


def test_extremal_extensions_on_a_line(line4):
    problem = ExtensionProblem(space=line4, F=[0, 3], h=[0.0, 1.0], lam=1.0)
    assert np.allclose(sup_convolution(problem).flat, [0.0, -1.0, 0.0, 1.0])
    assert np.allclose(inf_convolution(problem).flat, [0.0, 1.0, 2.0, 1.0])
    assert np.allclose(midpoint_extension(problem).flat, [0.0, 0.0, 1.0, 1.0])


def test_infeasible_slope_leaves_data_unpinned(line4):
    problem = ExtensionProblem(space=line4, F=[0, 3], h=[0.0, 1.0], lam=0.2)
    assert not problem.is_feasible()
    lower = sup_convolution(problem)
    assert lower.flat[0] == pytest.approx(0.4)


def test_problem_rejects_bad_data(line4):
    with pytest.raises(DomainError):
        ExtensionProblem(space=line4, F=[], h=[], lam=1.0)
    with pytest.raises(DomainError):
        ExtensionProblem(space=line4, F=[0, 0], h=[0.0, 0.0], lam=1.0)
    with pytest.raises(DomainError):
        ExtensionProblem(space=line4, F=[0], h=[0.0], lam=0.0)
    with pytest.raises(DomainError):
        ExtensionProblem(space=line4, F=[0, 1], h=[0.0], lam=1.0)


def test_extensions_of_the_demo_cloud_are_sandwiched(small_cloud, rng):
    F = small_cloud.boundary_indices
    problem = ExtensionProblem.from_field(small_cloud.space, F, small_cloud.values, 1.0)
    lower = sup_convolution(problem)
    upper = inf_convolution(problem)

    assert np.array_equal(lower.at(F), problem.h)
    assert np.array_equal(upper.at(F), problem.h)
    assert np.all(lower.flat <= upper.flat + 1e-12)
    assert lip_constant(lower).value <= 1.0 + 1e-9
    assert lip_constant(upper).value <= 1.0 + 1e-9

    for sample in random_feasible_extensions(problem, 100, rng):
        assert np.array_equal(sample.at(F), problem.h)
        assert lip_constant(sample).value <= 1.0 + 1e-9
        assert np.all(lower.flat <= sample.flat + 1e-12)
        assert np.all(sample.flat <= upper.flat + 1e-12)


def test_parallel_width_does_not_change_values(small_cloud):
    F = small_cloud.boundary_indices
    problem = ExtensionProblem.from_field(small_cloud.space, F, small_cloud.values, 1.0)
    assert np.array_equal(inf_convolution(problem, n_jobs=1).flat, inf_convolution(problem, n_jobs=3).flat)


# ============================================
# CONSTRAINED MAXIMUM
# ============================================

def test_constrained_max_respects_the_bound(line4):
    bound = UpperBound.from_array(np.array([np.inf, 0.5, np.inf, np.inf]))
    u = constrained_max_lipschitz(line4, [0, 3], np.array([0.0, 1.0]), bound, lam=1.0)
    assert np.allclose(u.flat, [0.0, 0.5, 1.5, 1.0])


def test_constrained_max_without_bound_is_the_inf_convolution(small_cloud):
    F = small_cloud.boundary_indices
    problem = ExtensionProblem.from_field(small_cloud.space, F, small_cloud.values, 1.0)
    u = constrained_max_lipschitz(small_cloud.space, F, problem.h, UpperBound.none(small_cloud.space.n), 1.0)
    assert np.allclose(u.flat, inf_convolution(problem).flat)


def test_constrained_max_is_above_every_bounded_feasible_extension(small_cloud, rng):
    F = small_cloud.boundary_indices
    problem = ExtensionProblem.from_field(small_cloud.space, F, small_cloud.values, 1.0)
    lower = sup_convolution(problem).flat
    upper = inf_convolution(problem).flat
    bound = UpperBound.everywhere(0.5 * (lower + upper))
    top = constrained_max_lipschitz(small_cloud.space, F, problem.h, bound, 1.0)
    assert np.all(top.flat <= bound.values + 1e-12)
    for sample in random_feasible_extensions(problem, 25, rng, bound=bound):
        assert np.all(sample.flat <= top.flat + 1e-12)


@pytest.mark.parametrize(
    "h, bound_values, lam, precondition",
    [
        ([0.0, 3.0], [np.inf] * 4, 0.5, "lip(h, F) <= lambda"),
        ([0.0, 1.0], [-0.5, np.inf, np.inf, np.inf], 1.0, "h <= b on F"),
        ([0.0, 1.0], [np.inf, -2.0, np.inf, np.inf], 1.0, "sup-convolution of h <= b"),
    ],
)
def test_empty_constraint_family(line4, h, bound_values, lam, precondition):
    bound = UpperBound.from_array(np.array(bound_values))
    with pytest.raises(EmptyConstraintFamilyError) as info:
        constrained_max_lipschitz(line4, [0, 3], np.array(h), bound, lam=lam)
    assert info.value.precondition == precondition
