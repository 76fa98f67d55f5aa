"""Surface normal estimation by local plane fits, as needed by the
point-to-plane residual."""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud, with_attributes
from .neighbours import NeighbourIndex


def fit_plane(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Total-least-squares plane through (n, 3) points.

    Returns (unit normal, offset) with the plane satisfying normal . x = offset.
    The normal is canonically oriented (see :func:`orient_normal`).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[0] < 3:
        raise ValueError("plane fit needs at least 3 points")
    centroid = pts.mean(axis=0)
    cov = np.cov((pts - centroid).T, bias=True)
    _, vectors = np.linalg.eigh(cov)
    normal = orient_normal(vectors[:, 0])
    return normal, float(normal @ centroid)


def orient_normal(normal: np.ndarray, viewpoint=None) -> np.ndarray:
    """Deterministic sign choice: flip toward the viewpoint direction
    (default +z half-space); break the orthogonal case lexicographically."""
    view = np.array([0.0, 0.0, 1.0]) if viewpoint is None else np.asarray(viewpoint, dtype=np.float64)
    d = float(normal @ view)
    if d < 0.0:
        return -normal
    if d > 0.0:
        return normal
    for c in normal:
        if c > 0.0:
            return normal
        if c < 0.0:
            return -normal
    return normal


def estimate_normals(
    cloud: PointCloud,
    radius: float,
    min_neighbours: int = 3,
    viewpoint=None,
) -> PointCloud:
    """Per-point unit normals from the covariance of each radius neighbourhood.

    The normal is the least-eigenvalue eigenvector of the neighbourhood
    covariance (the query point included). Points with fewer than
    ``min_neighbours`` neighbours fall back to the plane fitted to the whole
    cloud, so isolated returns in sparse scans still get a usable normal.
    """
    if len(cloud) < 3:
        raise ValueError("degenerate cloud")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if min_neighbours < 3:
        raise ValueError("min_neighbours must be at least 3")

    index = NeighbourIndex(cloud)
    neighbourhoods = index._tree.query_ball_point(cloud.points, radius)
    fallback, _ = fit_plane(cloud.points)
    fallback = orient_normal(fallback, viewpoint)

    normals = np.empty((len(cloud), 3))
    for i, ids in enumerate(neighbourhoods):
        if len(ids) < min_neighbours:
            normals[i] = fallback
            continue
        patch = cloud.points[ids]
        patch = patch - patch.mean(axis=0)
        cov = patch.T @ patch
        _, vectors = np.linalg.eigh(cov)
        n = vectors[:, 0]
        n = n / np.linalg.norm(n)
        normals[i] = orient_normal(n, viewpoint)
    return with_attributes(cloud, normals=normals)
