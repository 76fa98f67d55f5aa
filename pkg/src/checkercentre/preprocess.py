"""Scan conditioning for real sensor data: bounding-box crop, RANSAC plane
outlier removal, Otsu intensity binarisation, intensity/colour conversion and
template resizing.

Low-cost sensors return strong off-plane outliers (mostly over the black
squares) and smeared intensity edges; these steps clean both before the
coloured solver runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, take, with_attributes
from .normals import fit_plane, orient_normal

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class PlaneModel:
    """Plane n . x = offset with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > UNIT_NORM_TOL:
            raise ValueError("plane normal must be unit length")
        object.__setattr__(self, "normal", n)

    def distances(self, points: np.ndarray) -> np.ndarray:
        return np.abs(points @ self.normal - self.offset)


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned crop box (inclusive bounds)."""

    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max_corner, dtype=np.float64).reshape(3)
        if np.any(lo > hi):
            raise ValueError("min corner must not exceed max corner")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)


def crop_aabb(cloud: PointCloud, box: Aabb) -> PointCloud:
    """Keep exactly the points inside the box (bounds inclusive)."""
    p = cloud.points
    mask = np.all(p >= box.min_corner, axis=1) & np.all(p <= box.max_corner, axis=1)
    return take(cloud, mask)


def ransac_plane(
    cloud: PointCloud,
    distance_threshold: float,
    iterations: int = 500,
    seed: int = 0,
) -> tuple[PlaneModel, np.ndarray]:
    """Seeded RANSAC plane fit.

    Each iteration samples 3 distinct points, fits their exact plane and
    counts points within ``distance_threshold``. The model with the most
    inliers wins (ties keep the earliest iteration); the returned plane is
    re-fit to the winning inlier set by total least squares, which removes
    the quantisation bias of a 3-point sample. The mask is the winning
    sample's inlier set. Deterministic for a fixed seed.
    """
    if len(cloud) < 3:
        raise ValueError("degenerate input")
    if distance_threshold <= 0.0:
        raise ValueError("distance_threshold must be positive")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")

    points = cloud.points
    rng = np.random.default_rng(seed)
    best_count = 0
    best_normal = None
    best_offset = 0.0
    for _ in range(iterations):
        sample = points[rng.choice(len(points), size=3, replace=False)]
        cross = np.cross(sample[1] - sample[0], sample[2] - sample[0])
        norm = np.linalg.norm(cross)
        edge = np.linalg.norm(sample[1] - sample[0]) * np.linalg.norm(sample[2] - sample[0])
        if norm <= 1e-12 * max(edge, 1e-300):
            continue  # collinear sample
        normal = cross / norm
        offset = float(normal @ sample[0])
        count = int(np.count_nonzero(np.abs(points @ normal - offset) <= distance_threshold))
        if count > best_count:
            best_count = count
            best_normal, best_offset = normal, offset
    if best_normal is None:
        raise ValueError("degenerate input")

    mask = np.abs(points @ best_normal - best_offset) <= distance_threshold
    refit_normal, refit_offset = fit_plane(points[mask])
    return PlaneModel(orient_normal(refit_normal), refit_offset), mask


def remove_outliers(
    cloud: PointCloud,
    distance_threshold: float,
    iterations: int = 500,
    seed: int = 0,
) -> PointCloud:
    """Inlier sub-cloud of the RANSAC plane; residual roughness is kept
    (points are filtered, never projected onto the plane)."""
    _, mask = ransac_plane(cloud, distance_threshold, iterations, seed)
    return take(cloud, mask)


def otsu_threshold(intensities, bins: int = 256) -> float:
    """Histogram threshold over [0, 1] maximising the between-class variance.

    Candidate thresholds are the interior bin edges k / bins; the lowest
    maximising edge is returned. Inputs that fall into a single bin have no
    black/white contrast to separate and raise "unimodal input".
    """
    values = np.asarray(intensities, dtype=np.float64).ravel()
    if values.size < 2:
        raise ValueError("need at least 2 samples")
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("intensities must lie in [0, 1]")

    counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
    counts = counts.astype(np.float64)
    centres = (np.arange(bins) + 0.5) / bins
    total = counts.sum()

    w0 = np.cumsum(counts)[:-1]            # class sizes below each interior edge
    m0 = np.cumsum(counts * centres)[:-1]  # class mass below each interior edge
    w1 = total - w0
    m_total = float((counts * centres).sum())
    valid = (w0 > 0) & (w1 > 0)
    variance = np.zeros(bins - 1)
    mu0 = np.divide(m0, w0, out=np.zeros_like(m0), where=valid)
    mu1 = np.divide(m_total - m0, w1, out=np.zeros_like(m0), where=valid)
    variance[valid] = (w0 * w1)[valid] / (total * total) * (mu0 - mu1)[valid] ** 2

    best = int(np.argmax(variance))  # argmax takes the first, i.e. lowest, edge
    if variance[best] <= 0.0:
        raise ValueError("unimodal input")
    return float((best + 1) / bins)


def binarize_intensity(cloud: PointCloud, threshold: float) -> PointCloud:
    """Intensity snapped to 0 below the threshold and 1 otherwise; colour is
    re-derived from the binary intensity."""
    if cloud.intensity is None:
        raise ValueError("missing intensity")
    intensity = np.where(cloud.intensity < threshold, 0.0, 1.0)
    return with_attributes(
        cloud, intensity=intensity, colour=np.repeat(intensity[:, None], 3, axis=1)
    )


def intensity_to_colour(cloud: PointCloud) -> PointCloud:
    """Grey colour channels replicated from intensity (intensity retained)."""
    if cloud.intensity is None:
        raise ValueError("missing intensity")
    return with_attributes(cloud, colour=np.repeat(cloud.intensity[:, None], 3, axis=1))


def stretch_intensity(cloud: PointCloud) -> PointCloud:
    """Min-max normalise intensity to span [0, 1] (no-op on constant data);
    applied before Otsu so raw reflectivity scales histogram consistently."""
    if cloud.intensity is None:
        raise ValueError("missing intensity")
    lo, hi = float(cloud.intensity.min()), float(cloud.intensity.max())
    if hi <= lo:
        return cloud
    return with_attributes(cloud, intensity=(cloud.intensity - lo) / (hi - lo))


def resize_template(
    template: PointCloud, current_side: float, physical_side: float
) -> PointCloud:
    """Uniform scale about the bounding-box centre, mapping a template of
    side ``current_side`` to the known physical dimensions."""
    if current_side <= 0.0 or physical_side <= 0.0:
        raise ValueError("sides must be positive")
    factor = physical_side / current_side
    lo, hi = template.bounding_box()
    centre = (lo + hi) / 2.0
    return with_attributes(template, points=centre + (template.points - centre) * factor)


def voxel_downsample(cloud: PointCloud, voxel_size: float) -> PointCloud:
    """Average points (and attributes) per occupied voxel; normals are
    re-normalised and colour re-derived from intensity when present.
    Output order follows sorted voxel keys, so it is deterministic."""
    if voxel_size <= 0.0:
        raise ValueError("voxel_size must be positive")
    if len(cloud) == 0:
        return cloud
    keys = np.floor(cloud.points / voxel_size).astype(np.int64)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
    keys = keys[order]
    boundaries = np.any(np.diff(keys, axis=0) != 0, axis=1)
    starts = np.concatenate([[0], np.nonzero(boundaries)[0] + 1])

    def _mean(values):
        sums = np.add.reduceat(values[order], starts, axis=0)
        counts = np.diff(np.concatenate([starts, [len(cloud)]])).astype(np.float64)
        return sums / (counts[:, None] if values.ndim == 2 else counts)

    points = _mean(cloud.points)
    intensity = None if cloud.intensity is None else np.clip(_mean(cloud.intensity), 0.0, 1.0)
    colour = None
    if cloud.colour is not None:
        if intensity is not None:
            colour = np.repeat(intensity[:, None], 3, axis=1)
        else:
            colour = np.clip(_mean(cloud.colour), 0.0, 1.0)
    normals = None
    if cloud.normals is not None:
        normals = _mean(cloud.normals)
        length = np.linalg.norm(normals, axis=1)
        cancelled = length < 1e-12  # opposing normals averaged out
        normals[cancelled] = [0.0, 0.0, 1.0]
        length[cancelled] = 1.0
        normals = normals / length[:, None]
    return PointCloud(points=points, intensity=intensity, colour=colour, normals=normals)
