import numpy as np
import pytest

from checkercentre import PointCloud, build_index, nearest, radius_neighbours

from conftest import brute_force_nearest, brute_force_radius


def test_empty_cloud_rejected():
    with pytest.raises(ValueError, match="empty cloud"):
        build_index(PointCloud(np.zeros((0, 3))))


def test_single_point():
    index = build_index(PointCloud([[0.0, 0.0, 0.0]]))
    pid, dist = nearest(index, [1.0, 0.0, 0.0])
    assert pid == 0
    assert dist == 1.0


def test_strictly_closer_point_wins():
    index = build_index(PointCloud([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    pid, _ = nearest(index, [0.9, 0.0, 0.0])
    assert pid == 0


def test_exact_hit_distance_zero():
    index = build_index(PointCloud([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
    pid, dist = nearest(index, [4.0, 5.0, 6.0])
    assert (pid, dist) == (1, 0.0)


def test_tie_breaks_to_lowest_id():
    index = build_index(PointCloud([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    pid, dist = nearest(index, [0.0, 0.0, 0.0])
    assert (pid, dist) == (0, 1.0)
    # many-way tie: vertices of a cube around the query
    corners = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
    pid, _ = nearest(build_index(PointCloud(corners)), [0.0, 0.0, 0.0])
    assert pid == 0


def test_radius_requires_positive():
    index = build_index(PointCloud([[0.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        radius_neighbours(index, [0.0, 0.0, 0.0], 0.0)


def test_radius_extremes(rng):
    pts = rng.normal(size=(40, 3))
    index = build_index(PointCloud(pts))
    assert radius_neighbours(index, [50.0, 50.0, 50.0], 1.0) == []
    assert len(radius_neighbours(index, [0.0, 0.0, 0.0], 1e9)) == 40


def test_radius_boundary_inclusive():
    index = build_index(PointCloud([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    assert radius_neighbours(index, [0.0, 0.0, 0.0], 1.0) == [0]
    assert radius_neighbours(index, [0.0, 0.0, 0.0], 2.0) == [0, 1]


def test_queries_agree_with_linear_scan(rng):
    # 1000 random query cases against the brute-force oracle
    for _ in range(10):
        n = int(rng.integers(1, 400))
        pts = rng.uniform(-1, 1, (n, 3))
        index = build_index(PointCloud(pts))
        for _ in range(50):
            q = rng.uniform(-1.2, 1.2, 3)
            pid, dist = nearest(index, q)
            oid, odist = brute_force_nearest(pts, q)
            assert pid == oid
            assert dist == pytest.approx(odist, rel=1e-12)
        for _ in range(50):
            q = rng.uniform(-1.2, 1.2, 3)
            r = float(rng.uniform(0.05, 1.5))
            assert radius_neighbours(index, q, r) == brute_force_radius(pts, q, r)


def test_duplicate_points_tie_to_lowest_id(rng):
    pts = np.tile(rng.normal(size=(1, 3)), (5, 1))
    index = build_index(PointCloud(pts))
    pid, dist = nearest(index, pts[0] + [0.5, 0.0, 0.0])
    assert (pid, dist) == (0, 0.5)
