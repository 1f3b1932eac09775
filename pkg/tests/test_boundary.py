"""
Tests for the boundary-preserving local step
"""
import numpy as np
import pytest

from src.demo import random_lipschitz_values
from src.errors import DomainError, PreconditionError
from src.extension import (
    ExtensionProblem,
    LocalStepInput,
    UpperBound,
    epsilon_lambda,
    in_constraint_family,
    local_step,
    random_feasible_extensions,
)
from src.metric import MetricSpace, ScalarField

NORMS = ("l1", "l2", "linf")


def random_step(rng: np.random.Generator) -> LocalStepInput:
    n = int(rng.integers(3, 21))
    space = MetricSpace.from_points(rng.uniform(size=(n, 2)), norm=NORMS[int(rng.integers(3))])
    F = np.sort(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
    u0 = random_lipschitz_values(space, 1.0, rng)
    mu = float(rng.uniform(0.0, 0.9))
    lam = mu + (1.0 - mu) * float(rng.uniform(0.05, 0.95))
    u_mu = random_lipschitz_values(space, mu, rng)[F]
    return LocalStepInput(
        space=space,
        F=F,
        u0=ScalarField(space, u0, name="u0"),
        u_mu=u_mu,
        mu=mu,
        delta=float(np.max(np.abs(u_mu - u0[F]))),
        lam=lam,
    )


@pytest.fixture
def line4():
    coords = np.column_stack([np.arange(4.0), np.zeros(4)])
    return MetricSpace.from_points(coords)


# ============================================
# ERROR INCREMENT
# ============================================

def test_epsilon_lambda_values():
    assert epsilon_lambda(0.5, 0.25, 1.0, 1.0) == pytest.approx(3.0)
    assert epsilon_lambda(0.5, 0.25, 1.0, 1.0, EF_empty=True) == 0.0
    assert epsilon_lambda(0.9, 0.0, 0.5, 0.0) == pytest.approx(0.1 / 0.9 * 0.9 * 0.5)


@pytest.mark.parametrize("lam, mu", [(0.5, 0.5), (0.4, 0.5), (1.0, 0.5), (0.5, -0.1)])
def test_epsilon_lambda_rejects_bad_slopes(lam, mu):
    with pytest.raises(DomainError):
        epsilon_lambda(lam, mu, 1.0, 1.0)


def test_epsilon_lambda_decreases_towards_one():
    values = [epsilon_lambda(lam, 0.3, 1.0, 0.2) for lam in np.linspace(0.35, 0.99, 30)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_epsilon_lambda_is_positive_off_F():
    assert epsilon_lambda(0.5, 0.25, 0.0, 1e-6) > 0.0
    with pytest.raises(PreconditionError) as info:
        epsilon_lambda(0.5, 0.25, 0.0, 0.0)
    assert not info.value.check.passed


# ============================================
# PRECONDITIONS
# ============================================

def test_steep_u0_is_refused(line4):
    u0 = ScalarField(line4, 2.0 * np.arange(4.0))
    step = LocalStepInput(space=line4, F=[0, 3], u0=u0, u_mu=[0.0, 6.0], mu=0.5, delta=0.0, lam=0.75)
    with pytest.raises(PreconditionError) as info:
        local_step(step)
    assert info.value.check.name == "lip(u0, E)"


def test_steep_boundary_data_is_refused(line4):
    u0 = ScalarField(line4, np.arange(4.0))
    step = LocalStepInput(space=line4, F=[0, 3], u0=u0, u_mu=[0.0, 3.0], mu=0.5, delta=0.0, lam=0.75)
    with pytest.raises(PreconditionError) as info:
        local_step(step)
    assert info.value.check.name == "lip(u_mu, F)"


def test_boundary_data_far_from_u0_is_refused(line4):
    u0 = ScalarField(line4, np.arange(4.0))
    step = LocalStepInput(space=line4, F=[0, 3], u0=u0, u_mu=[0.0, 1.0], mu=0.5, delta=0.5, lam=0.75)
    with pytest.raises(PreconditionError) as info:
        local_step(step)
    assert info.value.check.name == "max |u_mu - u0| on F"


@pytest.mark.parametrize(
    "mu, lam, delta",
    [(0.5, 0.5, 0.0), (0.5, 1.0, 0.0), (0.5, 0.75, -1.0), (1.0, 1.5, 0.0)],
)
def test_input_domain(line4, mu, lam, delta):
    u0 = ScalarField(line4, np.zeros(4))
    with pytest.raises(DomainError):
        LocalStepInput(space=line4, F=[0], u0=u0, u_mu=[0.0], mu=mu, delta=delta, lam=lam)


def test_partial_u0_is_rejected(line4):
    u0 = ScalarField.on_subset(line4, [0, 1], [0.0, 0.0])
    with pytest.raises(DomainError):
        LocalStepInput(space=line4, F=[0], u0=u0, u_mu=[0.0], mu=0.0, delta=0.0, lam=0.5)


# ============================================
# LOCAL STEP
# ============================================

def test_line_instance(line4):
    u0 = ScalarField(line4, 0.9 * np.arange(4.0))
    step = LocalStepInput(space=line4, F=[0], u0=u0, u_mu=[0.0], mu=0.0, delta=0.0, lam=0.5)
    result = local_step(step)
    eps = epsilon_lambda(0.5, 0.0, 2.0, 1.0)
    assert result.eps_lambda == pytest.approx(eps)
    # the bound u0 + eps never binds before the 0.5-cone from the origin does
    assert np.allclose(result.u_lambda.flat, np.minimum(0.5 * np.arange(4.0), 0.9 * np.arange(4.0) + eps))
    assert result.G_lambda.size == 0
    assert result.ledger.passed


def test_step_with_F_equal_to_E_returns_the_data(line4):
    u0 = ScalarField(line4, 0.2 * np.arange(4.0))
    u_mu = 0.1 * np.arange(4.0)
    step = LocalStepInput(space=line4, F=np.arange(4), u0=u0, u_mu=u_mu, mu=0.1, delta=0.3, lam=0.5)
    result = local_step(step)
    assert result.eps_lambda == 0.0
    assert np.array_equal(result.u_lambda.flat, u_mu)


def test_seeded_local_step_suite():
    rng = np.random.default_rng(2024)
    for k in range(500):
        step = random_step(rng)
        result = local_step(step)
        u = result.u_lambda.flat
        eps = result.eps_lambda

        assert result.ledger.passed, k
        assert np.array_equal(u[step.F], step.u_mu), k
        assert np.max(np.abs(step.u0.flat - u)) <= step.delta + eps + 1e-9, k
        assert result.G_lambda.size == 0, k
        assert in_constraint_family(u, step, eps), k

        if k < 50:
            problem = ExtensionProblem(space=step.space, F=step.F, h=step.u_mu, lam=step.lam)
            bound = UpperBound.everywhere(step.u0.flat + step.delta + eps)
            for member in random_feasible_extensions(problem, 5, rng, bound=bound):
                assert np.all(member.flat <= u + 1e-12), k
