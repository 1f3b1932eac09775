"""
Tests for point-cloud, distance-matrix and grid files
"""
import numpy as np
import pytest

from src.errors import InputError
from src.metric import MetricSpace
from src.metric.io import read_distance_matrix, read_point_cloud, write_distance_matrix, write_point_field
from src.smoothing import GridDomain, read_grid, write_grid

CLOUD = """id,x1,x2,value,tag
a,0,0,0.0,boundary
b,1,0,0.5,boundary
c,0.5,0.5,0.25,interior
"""


def test_read_point_cloud(tmp_path):
    path = tmp_path / "cloud.csv"
    path.write_text(CLOUD)
    cloud = read_point_cloud(path, norm="l1")
    assert len(cloud) == 3
    assert cloud.space.ids == ["a", "b", "c"]
    assert np.array_equal(cloud.boundary_indices, [0, 1])
    assert np.array_equal(cloud.interior_indices, [2])
    assert cloud.space.distance(0, 2) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "content, line",
    [
        ("id,x1,x2,value,tag\na,0,0,zero,boundary\n", 2),
        ("id,x1,x2,value,tag\na,0,0,0,boundary\nb,1,0,1,edge\n", 3),
        ("id,x1,x2,value,tag\na,0,0,0,boundary\na,1,0,1,interior\n", 3),
        ("id,x1,x2,value,tag\na,0,0,0,boundary\nb,1,oops,1,interior\n", 3),
        ("id,x1,y,value,tag\na,0,0,0,boundary\n", 1),
    ],
)
def test_malformed_cloud_reports_the_line(tmp_path, content, line):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(InputError) as info:
        read_point_cloud(path)
    assert info.value.line == line
    assert f"bad.csv:{line}:" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_point_cloud(tmp_path / "absent.csv")


def test_point_field_and_matrix_files_round_trip(tmp_path, rng):
    space = MetricSpace.from_points(rng.uniform(size=(12, 2)), norm="linf")
    values = rng.normal(size=12)
    tags = ["boundary"] * 4 + ["interior"] * 8
    write_point_field(tmp_path / "field.csv", space, values, tags)
    write_distance_matrix(tmp_path / "matrix.csv", space)

    cloud = read_point_cloud(tmp_path / "field.csv", norm="linf")
    assert np.array_equal(cloud.values.flat, values)
    assert np.array_equal(cloud.space.coords, space.coords)

    ids, matrix = read_distance_matrix(tmp_path / "matrix.csv")
    assert ids == space.ids
    assert np.array_equal(matrix, space.distances(space.all_indices, space.all_indices))

    from_matrix = read_point_cloud(tmp_path / "field.csv", matrix_path=tmp_path / "matrix.csv")
    assert from_matrix.space.coords is None
    assert from_matrix.space.distance(3, 9) == space.distance(3, 9)


def test_grid_round_trip_keeps_masks(tmp_path, disc65):
    field = disc65.sample(lambda X, Y: X * Y + 0.1)
    write_grid(tmp_path / "f.grid", field)
    domain, loaded = read_grid(tmp_path / "f.grid")
    assert domain.shape == disc65.shape
    assert np.array_equal(domain.interior, disc65.interior)
    assert np.array_equal(domain.boundary, disc65.boundary)
    assert np.array_equal(loaded.values, field.values)


def test_grid_body_errors_carry_line_numbers(tmp_path):
    domain = GridDomain.square(0.0, 1.0, n=5)
    path = tmp_path / "g.grid"
    write_grid(path, domain.sample(lambda X, Y: X))
    lines = path.read_text().splitlines()
    lines[6 + 3] = "abc,I"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InputError) as info:
        read_grid(path)
    assert info.value.line == 10

    lines[6 + 3] = "0.5,Q"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InputError) as info:
        read_grid(path)
    assert info.value.line == 10
