"""Point cloud container shared by every stage of the matching pipeline.

Clouds are unordered: no raster or scan-line structure is ever assumed.
All attribute arrays are validated and frozen at construction, so instances
are safe to share between threads and between concurrent registrations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

UNIT_NORM_TOL = 1e-9


def _frozen_array(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PointCloud:
    """Positions in metres with optional per-point intensity, colour and normals.

    Invariants enforced at construction:
      * every attribute array has one entry per point,
      * intensity and colour channels lie in [0, 1],
      * normals are unit length to within ``UNIT_NORM_TOL``.
    """

    points: np.ndarray
    intensity: np.ndarray | None = None
    colour: np.ndarray | None = None
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = _frozen_array(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        object.__setattr__(self, "points", pts)
        n = len(pts)

        if self.intensity is not None:
            inten = _frozen_array(self.intensity)
            if inten.shape != (n,):
                raise ValueError(f"intensity must have shape ({n},), got {inten.shape}")
            if n and (inten.min() < 0.0 or inten.max() > 1.0):
                raise ValueError("intensity values must lie in [0, 1]")
            object.__setattr__(self, "intensity", inten)

        if self.colour is not None:
            col = _frozen_array(self.colour)
            if col.shape != (n, 3):
                raise ValueError(f"colour must have shape ({n}, 3), got {col.shape}")
            if n and (col.min() < 0.0 or col.max() > 1.0):
                raise ValueError("colour channels must lie in [0, 1]")
            object.__setattr__(self, "colour", col)

        if self.normals is not None:
            nrm = _frozen_array(self.normals)
            if nrm.shape != (n, 3):
                raise ValueError(f"normals must have shape ({n}, 3), got {nrm.shape}")
            if n:
                norms = np.linalg.norm(nrm, axis=1)
                if np.max(np.abs(norms - 1.0)) > UNIT_NORM_TOL:
                    raise ValueError("normals must be unit length")
            object.__setattr__(self, "normals", nrm)

    def __len__(self):
        return len(self.points)

    @property
    def has_intensity(self):
        return self.intensity is not None

    @property
    def has_colour(self):
        return self.colour is not None

    @property
    def has_normals(self):
        return self.normals is not None

    def bounding_box(self):
        """(min corner, max corner) of the positions; errors on an empty cloud."""
        if len(self) == 0:
            raise ValueError("empty cloud has no bounding box")
        return self.points.min(axis=0), self.points.max(axis=0)

    def extent(self):
        """Largest axis-aligned side of the bounding box."""
        lo, hi = self.bounding_box()
        return float(np.max(hi - lo))


def take(cloud: PointCloud, index) -> PointCloud:
    """Sub-cloud keeping rows selected by a boolean mask or index array."""
    index = np.asarray(index)
    return PointCloud(
        points=cloud.points[index],
        intensity=None if cloud.intensity is None else cloud.intensity[index],
        colour=None if cloud.colour is None else cloud.colour[index],
        normals=None if cloud.normals is None else cloud.normals[index],
    )


def with_attributes(cloud: PointCloud, **changes) -> PointCloud:
    """Copy of the cloud with selected attribute arrays replaced (revalidated)."""
    return replace(cloud, **changes)
