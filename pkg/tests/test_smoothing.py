"""
Tests for grid domains, mollifiers, envelopes and shaped smoothing
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import DomainError, KernelUnderResolvedError
from src.metric import ScalarField
from src.smoothing import (
    EnvelopeParams,
    GridDomain,
    Kernel,
    dual_grad_field,
    envelope_checks,
    fact_check,
    flatten,
    grad_field,
    homogeneous_smoothing,
    lasry_lions,
    lasry_lions_bound,
    moreau_inf,
    mollify,
    radius_levels,
    smooth_below_constant,
    stencil_lip,
    tolerance_shape,
    variable_mollify,
)


@pytest.fixture
def square65():
    return GridDomain.square(0.0, 1.0, n=65)


# ============================================
# DOMAINS
# ============================================

def test_square_masks(square33):
    assert square33.boundary.sum() == 4 * 32
    assert square33.interior.sum() == 31 * 31
    assert not square33.exterior.any()
    assert square33.is_square_lattice
    assert square33.boundary_distance[16, 16] == pytest.approx(0.5)


def test_interval_and_disc(disc65):
    line = GridDomain.interval(-1.0, 1.0, n=21)
    assert line.d == 1
    assert np.flatnonzero(line.boundary).tolist() == [0, 20]
    assert disc65.exterior[0, 0]
    assert disc65.interior[32, 32]
    assert disc65.region.sum() == disc65.interior.sum() + disc65.boundary.sum()


def test_domain_rejects_degenerate_lattices():
    with pytest.raises(DomainError):
        GridDomain([(0.0, 1.0)], [2])
    with pytest.raises(DomainError):
        GridDomain([(1.0, 0.0)], [5])
    with pytest.raises(DomainError):
        GridDomain([(0.0, 1.0), (0.0, 1.0)], [5, 5], region=np.ones((4, 5), dtype=bool))
    region = np.zeros((5, 5), dtype=bool)
    region[2, 2] = True
    with pytest.raises(DomainError):
        GridDomain([(0.0, 1.0), (0.0, 1.0)], [5, 5], region=region)


def test_offsets_within_follow_the_norm(square33):
    h = square33.h_max
    assert len(square33.offsets_within(1.5 * h)) == 9
    l1 = GridDomain.square(0.0, 1.0, n=33, norm="l1")
    assert len(l1.offsets_within(1.5 * h)) == 5


@pytest.mark.parametrize("norm, expected", [("l2", np.sqrt(5.0)), ("l1", 2.0), ("linf", 3.0)])
def test_stencil_lip_of_a_linear_field(norm, expected):
    domain = GridDomain.square(0.0, 1.0, n=33, norm=norm)
    field = domain.sample(lambda X, Y: 2.0 * X + Y)
    assert stencil_lip(domain, field.values).value == pytest.approx(expected, rel=1e-12)


def test_gradients_of_a_linear_field(square33):
    field = square33.sample(lambda X, Y: 2.0 * X + Y)
    grad = grad_field(field)
    assert np.allclose(grad[0][square33.interior], 2.0)
    assert np.allclose(grad[1][square33.interior], 1.0)
    assert np.all(grad[:, square33.boundary] == 0.0)
    assert np.allclose(dual_grad_field(field).values[square33.interior], np.sqrt(5.0))


def test_fact_check(square33):
    field = square33.sample(lambda X, Y: 0.5 * X, name="v")
    assert fact_check(field, K=1.0).passed
    failed = fact_check(field, K=0.4)
    assert not failed.passed
    assert failed.failures[0].name == "max ‖Dv‖_* on the interior"


# ============================================
# MOLLIFIERS
# ============================================

def test_bump_kernel(square33):
    kernel = Kernel.bump(square33, 0.1)
    assert kernel.mass == pytest.approx(1.0)
    assert np.allclose(kernel.weights, kernel.weights[::-1, ::-1])
    assert kernel.half_width == (3, 3)
    with pytest.raises(KernelUnderResolvedError):
        Kernel.bump(square33, 0.5 * square33.h_max)


def test_mollify_keeps_linear_fields_away_from_the_edge(square33):
    field = square33.sample(lambda X, Y: 0.3 * X - 0.7 * Y)
    smoothed = mollify(field, Kernel.bump(square33, 0.1))
    inner = (slice(4, -4), slice(4, -4))
    assert np.allclose(smoothed.values[inner], field.values[inner], atol=1e-12)


def test_mollified_abs_stays_within_k_delta():
    line = GridDomain.interval(-1.0, 1.0, n=201)
    f = line.sample(np.abs, name="f")
    smoothed = mollify(f, Kernel.bump(line, 0.1))
    gap = np.abs(smoothed.values - f.values)
    assert gap.max() <= 1.0 * 0.1
    assert smoothed.values[100] > 0.0
    assert stencil_lip(line, smoothed.values).value <= 1.0 + 1e-12


def test_radius_levels_never_round_up():
    radius = np.array([0.05, 0.1, 0.2, 0.3])
    assert np.allclose(radius_levels(radius, max_levels=2, floor=0.06), [0.0, 0.1, 0.1, 0.3])
    assert np.allclose(radius_levels(radius, max_levels=8, floor=0.0), radius)


def test_variable_mollify(square33):
    u = square33.sample(lambda X, Y: 0.5 * np.abs(X - 0.5), name="u")
    result = variable_mollify(u, np.full(square33.shape, 0.2))
    gap = np.abs(result.v.values - u.values)
    assert result.ledger.passed
    assert gap.max() <= 0.2
    assert np.all(gap[square33.boundary] == 0.0)
    assert result.levels >= 1
    assert np.all(result.radius[square33.boundary] == 0.0)


def test_variable_mollify_needs_two_mesh_widths(square33):
    u = square33.sample(lambda X, Y: X)
    with pytest.raises(KernelUnderResolvedError):
        variable_mollify(u, np.full(square33.shape, square33.h_max))
    with pytest.raises(DomainError):
        variable_mollify(u, np.zeros(square33.shape))


@pytest.mark.parametrize("profile", [lambda X, Y: 3.0 * X, lambda X, Y: 3.0 * X ** 2, lambda X, Y: 0.5 * X ** 2])
def test_constant_radius_matches_mollify(square65, profile):
    u = square65.sample(profile, name="u")
    result = variable_mollify(u, 0.125, clamp_boundary=False, audit_nodes=0)
    fixed = mollify(u, Kernel.bump(square65, 0.125))
    interior = square65.interior
    assert result.levels == 1
    assert np.allclose(result.radius[interior], 0.125)
    assert np.max(np.abs(result.v.values - fixed.values)[interior]) < 1e-10
    assert result.ledger.passed


def test_lipschitz_scale_keeps_steep_fields_within_eps(square65):
    u = square65.sample(lambda X, Y: 3.0 * X ** 2, name="u")
    K = stencil_lip(square65, u.values).value
    result = variable_mollify(u, 0.25, lipschitz_scale=True)
    assert result.ledger.passed
    assert result.radius.max() <= 0.25 / K + 1e-12
    assert np.abs(result.v.values - u.values).max() <= 0.25


# ============================================
# ENVELOPES
# ============================================

def test_moreau_envelope_of_a_linear_function():
    line = GridDomain.interval(0.0, 1.0, n=101)
    f = line.sample(lambda X: 0.5 * X)
    g = moreau_inf(f, lam=0.04)
    x = line.axes[0]
    assert np.allclose(g.values[2:], 0.5 * x[2:] - 0.5 * 0.5 ** 2 * 0.04, atol=1e-12)


def test_envelope_sandwich_and_constants(square33, rng):
    f = square33.sample(lambda X, Y: 0.8 * np.abs(X - 0.5), name="f")
    lower, upper, ll, ledger = envelope_checks(f, EnvelopeParams(lam=0.05, mu=0.025), rng=rng, n_balls=20)
    assert ledger.passed, [c.describe() for c in ledger.failures]
    assert np.all(lower.values <= f.values + 1e-12)
    assert np.all(f.values <= upper.values + 1e-12)
    assert np.all(lower.values <= ll.values + 1e-12)
    assert np.all(ll.values <= upper.values + 1e-12)
    distance = next(check for check in ledger if check.name == "‖g_lambda^mu - f‖_inf")
    assert distance.measured == pytest.approx(np.max(np.abs(ll.values - f.values)))
    assert distance.bound == pytest.approx(0.5 * 0.075 * 0.8 ** 2 + 2.0 * square33.h_max)


def test_lasry_lions_distance_shrinks_with_lambda():
    line = GridDomain.interval(0.0, 1.0, n=257)
    h = line.h_max
    f = line.sample(lambda X: np.abs(X - 0.5), name="f")
    distances = []
    for k in range(2, 9):
        lam = 2.0 ** -k
        ll = lasry_lions(f, EnvelopeParams(lam=lam, mu=0.5 * lam, K=1.0))
        distance = float(np.max(np.abs(ll.values - f.values)))
        assert distance <= lasry_lions_bound(lam, 0.5 * lam, 1.0, h)
        distances.append(distance)
    assert np.all(np.diff(distances) <= 0.25 * h)
    assert distances[-1] < 3.0 * h
    assert distances[-1] < distances[0]


def test_envelope_params_order():
    with pytest.raises(ValidationError):
        EnvelopeParams(lam=0.02, mu=0.05)
    with pytest.raises(ValidationError):
        EnvelopeParams(lam=0.05, mu=0.0)


# ============================================
# FLATTENING AND SHAPING
# ============================================

def test_flatten(square33):
    field = ScalarField(square33, np.zeros(square33.shape))
    values = np.array([-1.0, -0.05, 0.0, 0.04, 0.3])
    field.values[0, :5] = values
    flat = flatten(field, 0.1)
    assert np.allclose(flat.values[0, :5], [-0.95, 0.0, 0.0, 0.0, 0.25])
    with pytest.raises(DomainError):
        flatten(field, 0.0)


def test_tolerance_shape():
    radii = np.linspace(0.0, 1.0, 11)
    constant = tolerance_shape(radii, np.full(11, 0.5), K=1.0, unit=0.25)
    assert np.allclose(constant.shaped, 0.25)
    assert constant.ledger.passed

    rising = tolerance_shape(radii, np.linspace(0.2, 0.9, 11), K=1.0, unit=0.25)
    assert rising.ledger.passed
    assert np.all(rising.shaped <= rising.delta + 1e-12)
    assert np.all(rising.shaped > 0)

    with pytest.raises(DomainError):
        tolerance_shape(radii, np.full(11, 1.2), K=1.0)
    with pytest.raises(DomainError):
        tolerance_shape(radii, np.linspace(0.9, 0.2, 11), K=1.0)


def test_smooth_below_constant(square65, rng):
    u = square65.sample(lambda X, Y: 0.5 * np.abs(X - 0.5) + 0.25 * np.abs(Y - 0.5), name="u")
    result = smooth_below_constant(u, K=1.0, eps=0.1, rng=rng)
    gap = np.abs(result.v.values - u.values)
    assert result.ledger.passed
    assert np.all(gap <= result.eps_field + 1e-9)
    assert np.all(gap[square65.boundary] == 0.0)
    assert dual_grad_field(result.v).values[square65.interior].max() < 1.0


def test_smoothing_refuses_fields_steeper_than_K(square65):
    u = square65.sample(lambda X, Y: 1.5 * X)
    with pytest.raises(DomainError):
        smooth_below_constant(u, K=1.0, eps=0.1)


def test_homogeneous_smoothing(square65):
    u = square65.sample(lambda X, Y: 0.5 * np.minimum.reduce([X, 1.0 - X, Y, 1.0 - Y]), name="u")
    result = homogeneous_smoothing(u, 0.2)
    assert result.ledger.passed
    assert np.all(result.v.values[square65.boundary] == 0.0)
    assert np.max(np.abs(result.v.values - u.values)) <= 0.2 + 1e-9
    with pytest.raises(DomainError):
        homogeneous_smoothing(square65.sample(lambda X, Y: X + 1.0), 0.2)
