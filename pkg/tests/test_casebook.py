"""
Tests for the limiting-case analysis
"""
import numpy as np
import pandas as pd
import pytest

from src.casebook import (
    axis_samples,
    circle_samples,
    image_inverse,
    image_map,
    l1_disc_case,
    linf_image_case,
    write_axis_profile,
)
from src.errors import DomainError


def test_samples():
    points = circle_samples(64)
    assert np.allclose(np.hypot(points[:, 0], points[:, 1]), 1.0)
    assert points[16].tolist() == [0.0, 1.0]
    assert points[48].tolist() == [0.0, -1.0]
    x = axis_samples(11)
    assert x.size == 9
    assert 0.0 in x
    for bad in (32, 66):
        with pytest.raises(DomainError):
            circle_samples(bad)
    with pytest.raises(DomainError):
        axis_samples(10)


def test_image_map_round_trip(rng):
    points = rng.uniform(-1.0, 1.0, size=(50, 2))
    assert np.allclose(image_inverse(image_map(points)), points)
    p, q = points[0], points[1]
    d1 = np.abs(p - q).sum()
    dinf = np.abs(image_map(p) - image_map(q)).max()
    assert dinf == pytest.approx(d1)


def test_l1_disc_forces_a_kink():
    result = l1_disc_case(n_boundary=256, n_axis=51, n_feasible=10)
    assert result.verdict
    assert result.ledger.passed
    assert result.max_axis_error <= 1e-9
    assert result.slope_gap == pytest.approx(2.0, abs=1e-9)
    left, right = result.kink_slopes["upper"]
    assert left == pytest.approx(-1.0) and right == pytest.approx(1.0)
    record = result.as_record()
    assert record["verdict"] is True
    assert "isometry_error" not in record


def test_linf_image_reproduces_the_kink():
    result = linf_image_case(n_boundary=256, n_axis=51, n_feasible=10, n_pairs=200)
    assert result.verdict
    assert result.norm == "linf"
    assert result.isometry_error <= 1e-12
    assert result.max_axis_error <= 1e-9
    assert result.slope_gap == pytest.approx(2.0, abs=1e-9)


def test_axis_profile_file(tmp_path):
    result = l1_disc_case(n_boundary=64, n_axis=21, n_feasible=2)
    path = write_axis_profile(tmp_path / "axis_profile.dat", result)
    frame = pd.read_csv(path, sep=" ")
    assert list(frame.columns) == ["x", "upper", "lower", "abs_x"]
    assert np.allclose(frame["x"].to_numpy(), result.axis_x, rtol=0.0, atol=1e-15)
    assert np.allclose(frame["upper"].to_numpy(), result.axis_upper, rtol=0.0, atol=1e-15)


@pytest.mark.parametrize("runner", [l1_disc_case, linf_image_case], ids=["l1-disc", "linf-image"])
def test_full_boundary_sampling(runner):
    result = runner(n_boundary=1024, n_axis=201)
    assert result.verdict
    assert result.ledger.passed
    assert result.max_axis_error <= 2.0 * result.mesh
    assert result.slope_gap >= 1.9
    for left, right in result.kink_slopes.values():
        assert left == pytest.approx(-1.0, abs=0.05)
        assert right == pytest.approx(1.0, abs=0.05)
    if result.norm == "linf":
        assert result.isometry_error <= 1e-12
