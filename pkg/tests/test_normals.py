import numpy as np
import pytest

from checkercentre import PointCloud, estimate_normals, rotation_about_axis
from checkercentre.normals import fit_plane


def planar_grid(n=15, extent=1.0, z=0.0):
    g = np.linspace(-extent / 2, extent / 2, n)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)])


def test_exact_plane_normals():
    cloud = PointCloud(planar_grid())
    out = estimate_normals(cloud, radius=0.2)
    np.testing.assert_allclose(out.normals, np.tile([0.0, 0.0, 1.0], (len(cloud), 1)), atol=1e-6)


def test_rotated_plane_equivariance():
    rot = rotation_about_axis([1.0, 0.0, 0.0], 30.0)
    cloud = PointCloud(planar_grid() @ rot.T)
    out = estimate_normals(cloud, radius=0.2)
    expected = rot @ np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(out.normals, np.tile(expected, (len(cloud), 1)), atol=1e-6)


def test_noisy_plane_within_one_degree(rng):
    pts = planar_grid(n=30)
    pts[:, 2] += rng.normal(0.0, 0.001, len(pts))  # sigma = 0.1% of extent
    out = estimate_normals(PointCloud(pts), radius=0.15)
    # oracle: total-least-squares plane over the full cloud
    oracle_normal, _ = fit_plane(pts)
    cosines = np.clip(out.normals @ oracle_normal, -1.0, 1.0)
    assert np.degrees(np.arccos(cosines)).max() < 1.0
    assert np.degrees(np.arccos(abs(oracle_normal[2]))) < 0.1


def test_isolated_points_fall_back_to_global_plane():
    pts = np.vstack([planar_grid(n=10, extent=0.5), [[5.0, 5.0, 0.0]]])
    out = estimate_normals(PointCloud(pts), radius=0.1, min_neighbours=3)
    np.testing.assert_allclose(out.normals[-1], [0.0, 0.0, 1.0], atol=1e-9)


def test_orientation_follows_viewpoint():
    cloud = PointCloud(planar_grid())
    down = estimate_normals(cloud, radius=0.2, viewpoint=[0.0, 0.0, -1.0])
    assert np.all(down.normals[:, 2] < 0.0)


def test_degenerate_cloud_rejected():
    with pytest.raises(ValueError, match="degenerate cloud"):
        estimate_normals(PointCloud([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), radius=1.0)
    with pytest.raises(ValueError):
        estimate_normals(PointCloud(planar_grid()), radius=-1.0)
    with pytest.raises(ValueError):
        estimate_normals(PointCloud(planar_grid()), radius=0.2, min_neighbours=2)


def test_fit_plane_oracle_on_known_plane():
    normal, offset = fit_plane(planar_grid(z=0.25))
    np.testing.assert_allclose(normal, [0.0, 0.0, 1.0], atol=1e-12)
    assert offset == pytest.approx(0.25)
