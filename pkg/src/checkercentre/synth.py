"""Synthetic checkerboard generation and controlled pose/noise perturbation:
the experimental apparatus behind the shift/rotation/noise studies.

All randomness flows from explicit integer seeds; there is no hidden global
RNG state anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, with_attributes
from .transforms import RigidTransform, rotation_about_axis


@dataclass(frozen=True)
class CheckerboardSpec:
    """Parametric description of the synthetic template.

    ``squares_per_side`` must be even so black and white cover equal area;
    ``point_spacing`` must give at least 4 samples across each square.
    """

    squares_per_side: int = 2
    square_size: float = 0.1
    point_spacing: float = 0.01
    black_value: float = 0.0
    white_value: float = 1.0

    def __post_init__(self):
        if self.squares_per_side < 2 or self.squares_per_side % 2 != 0:
            raise ValueError("squares_per_side must be even and at least 2")
        if self.square_size <= 0.0 or self.point_spacing <= 0.0:
            raise ValueError("square_size and point_spacing must be positive")
        if self.point_spacing > self.square_size / 4.0:
            raise ValueError("point_spacing must be at most square_size / 4")
        for v in (self.black_value, self.white_value):
            if not 0.0 <= v <= 1.0:
                raise ValueError("black/white values must lie in [0, 1]")

    @property
    def side_length(self) -> float:
        return self.squares_per_side * self.square_size


@dataclass(frozen=True)
class Perturbation:
    """Initial misalignment applied to the template before registration.

    ``shift_fraction`` is relative to the template side length, swept from 0
    (full overlap) to 1.5 (no overlap). In-plane rotation is about the
    template normal; the out-of-plane axis is drawn uniformly in the plane
    from ``seed``.
    """

    shift_fraction: float
    shift_direction: tuple[float, float]
    in_plane_deg: float = 0.0
    out_plane_deg: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.shift_fraction <= 1.5:
            raise ValueError("shift_fraction must lie in [0, 1.5]")
        d = np.asarray(self.shift_direction, dtype=np.float64)
        if d.shape != (2,) or abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("shift_direction must be a unit 2-vector")


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian perturbation of positions (per axis) and intensity."""

    position_sigma: float = 0.0
    intensity_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.position_sigma < 0.0 or self.intensity_sigma < 0.0:
            raise ValueError("noise sigmas must be non-negative")


def generate_checkerboard(spec: CheckerboardSpec) -> PointCloud:
    """Regular grid in the z = 0 plane, centred on the origin, coloured as a
    checkerboard.

    The grid covers exactly [-L/2, L/2]^2 (L = side length); when the spacing
    does not divide L the nearest point count is used so the extent stays
    exact. Intensity is white where the containing square has even index
    parity; points exactly on a square boundary belong to the square with the
    larger index. Colour replicates the intensity; normals are +z.
    """
    half = spec.side_length / 2.0
    cells = max(int(round(spec.side_length / spec.point_spacing)), 1)
    coords = np.linspace(-half, half, cells + 1)
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    x = xx.ravel()
    y = yy.ravel()

    # floor with a small nudge so exact boundaries land in the larger square
    ix = np.floor((x + half) / spec.square_size + 1e-9).astype(int)
    iy = np.floor((y + half) / spec.square_size + 1e-9).astype(int)
    ix = np.clip(ix, 0, spec.squares_per_side - 1)
    iy = np.clip(iy, 0, spec.squares_per_side - 1)
    white = (ix + iy) % 2 == 0
    intensity = np.where(white, spec.white_value, spec.black_value)

    points = np.column_stack([x, y, np.zeros_like(x)])
    normals = np.tile([0.0, 0.0, 1.0], (len(points), 1))
    return PointCloud(
        points=points,
        intensity=intensity,
        colour=np.repeat(intensity[:, None], 3, axis=1),
        normals=normals,
    )


def perturbation_to_transform(pert: Perturbation, spec: CheckerboardSpec) -> RigidTransform:
    """Pose offset for a trial: in-plane rotation, then out-of-plane rotation
    about a seeded in-plane axis, then the translation in the original plane.

    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(pert.seed)
    axis_angle = rng.uniform(0.0, 2.0 * np.pi)

    r_in = rotation_about_axis([0.0, 0.0, 1.0], pert.in_plane_deg)
    r_out = rotation_about_axis(
        [np.cos(axis_angle), np.sin(axis_angle), 0.0], pert.out_plane_deg
    )
    dx, dy = pert.shift_direction
    shift = pert.shift_fraction * spec.side_length * np.array([dx, dy, 0.0])
    return RigidTransform(r_out @ r_in, shift)


def add_noise(cloud: PointCloud, noise: NoiseSpec) -> PointCloud:
    """Seeded Gaussian jitter: positions per axis, intensity clamped to [0, 1]
    with colour re-derived. Zero sigmas return the cloud unchanged."""
    if noise.position_sigma == 0.0 and noise.intensity_sigma == 0.0:
        return cloud
    rng = np.random.default_rng(noise.seed)
    changes = {}
    if noise.position_sigma > 0.0:
        changes["points"] = cloud.points + rng.normal(
            0.0, noise.position_sigma, cloud.points.shape
        )
    if noise.intensity_sigma > 0.0 and cloud.intensity is not None:
        intensity = np.clip(
            cloud.intensity + rng.normal(0.0, noise.intensity_sigma, len(cloud)), 0.0, 1.0
        )
        changes["intensity"] = intensity
        if cloud.colour is not None:
            changes["colour"] = np.repeat(intensity[:, None], 3, axis=1)
    return with_attributes(cloud, **changes)
