import numpy as np
import pytest

from checkercentre import CheckerboardSpec, PointCloud, generate_checkerboard


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def spec():
    return CheckerboardSpec()


@pytest.fixture
def template(spec):
    return generate_checkerboard(spec)


def random_cloud(rng, n=100, scale=1.0, with_attrs=False):
    points = rng.uniform(-scale, scale, (n, 3))
    if not with_attrs:
        return PointCloud(points)
    normals = rng.normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return PointCloud(
        points,
        intensity=rng.uniform(0, 1, n),
        colour=rng.uniform(0, 1, (n, 3)),
        normals=normals,
    )


def brute_force_nearest(points, query):
    """Linear-scan oracle: (id, distance), ties by lowest id via argmin."""
    d = np.linalg.norm(points - query, axis=1)
    i = int(np.argmin(d))
    return i, float(d[i])


def brute_force_radius(points, query, radius):
    """Linear-scan oracle: ids within radius sorted by (distance, id)."""
    d = np.linalg.norm(points - query, axis=1)
    ids = np.nonzero(d <= radius)[0]
    order = np.lexsort((ids, d[ids]))
    return [int(i) for i in ids[order]]


def otsu_oracle(values, bins=256):
    """Exhaustive between-class-variance scan over all interior bin edges."""
    counts, _ = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(0.0, 1.0))
    centres = (np.arange(bins) + 0.5) / bins
    total = counts.sum()
    best_edge, best_var = None, 0.0
    for edge in range(1, bins):
        w0 = counts[:edge].sum()
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        mu0 = (counts[:edge] * centres[:edge]).sum() / w0
        mu1 = (counts[edge:] * centres[edge:]).sum() / w1
        var = (w0 / total) * (w1 / total) * (mu0 - mu1) ** 2
        if var > best_var:
            best_var, best_edge = var, edge
    if best_edge is None or best_var <= 0.0:
        raise ValueError("unimodal input")
    return best_edge / bins
