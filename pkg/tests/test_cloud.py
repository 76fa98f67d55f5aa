import numpy as np
import pytest

from checkercentre import PointCloud, take

from conftest import random_cloud


def test_attribute_lengths_must_match():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 3)), intensity=np.zeros(2))
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 3)), colour=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 3)), normals=np.tile([0.0, 0.0, 1.0], (4, 1)))


def test_intensity_and_colour_ranges():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((1, 3)), intensity=np.array([1.5]))
    with pytest.raises(ValueError):
        PointCloud(np.zeros((1, 3)), colour=np.array([[-0.1, 0.0, 0.0]]))


def test_normals_must_be_unit():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((1, 3)), normals=np.array([[0.0, 0.0, 0.9]]))
    # within 1e-9 is accepted
    PointCloud(np.zeros((1, 3)), normals=np.array([[0.0, 0.0, 1.0 + 5e-10]]))


def test_arrays_are_frozen(rng):
    cloud = random_cloud(rng, 10)
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 99.0


def test_construction_copies_input(rng):
    pts = rng.normal(size=(5, 3))
    cloud = PointCloud(pts)
    pts[0, 0] = 123.0
    assert cloud.points[0, 0] != 123.0


def test_take_keeps_attribute_alignment(rng):
    cloud = random_cloud(rng, 20, with_attrs=True)
    mask = cloud.points[:, 0] > 0
    sub = take(cloud, mask)
    assert len(sub) == mask.sum()
    np.testing.assert_array_equal(sub.points, cloud.points[mask])
    np.testing.assert_array_equal(sub.intensity, cloud.intensity[mask])
    np.testing.assert_array_equal(sub.colour, cloud.colour[mask])
    np.testing.assert_array_equal(sub.normals, cloud.normals[mask])


def test_empty_cloud_is_legal():
    cloud = PointCloud(np.zeros((0, 3)))
    assert len(cloud) == 0
    with pytest.raises(ValueError):
        cloud.bounding_box()
