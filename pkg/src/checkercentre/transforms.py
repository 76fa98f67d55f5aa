"""Rigid SE(3) transforms: the quantity ICP estimates and the carrier of the
measured target centre."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, _frozen_array

ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """Rotation (3x3, orthonormal, det +1) plus translation (metres)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = _frozen_array(self.rotation)
        tra = _frozen_array(self.translation).reshape(3)
        if rot.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rot.shape}")
        err = rot.T @ rot - np.eye(3)
        if np.max(np.abs(err)) > ORTHONORMAL_TOL:
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(rot) < 0.0:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tra)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map raw positions (n, 3) or a single 3-vector through R p + t."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous form, for reporting."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


def compose(t2: RigidTransform, t1: RigidTransform) -> RigidTransform:
    """Transform equal to applying t1 first, then t2."""
    return RigidTransform(t2.rotation @ t1.rotation, t2.rotation @ t1.translation + t2.translation)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation)


def apply_transform(cloud: PointCloud, t: RigidTransform) -> PointCloud:
    """Positions mapped p -> R p + t, normals n -> R n; other attributes kept."""
    return PointCloud(
        points=t.apply(cloud.points),
        intensity=cloud.intensity,
        colour=cloud.colour,
        normals=None if cloud.normals is None else cloud.normals @ t.rotation.T,
    )


def target_centre(t: RigidTransform, template_centre) -> np.ndarray:
    """Measured target centre in sensor coordinates: the template centre moved
    through the final registration transform."""
    return t.apply(np.asarray(template_centre, dtype=np.float64).reshape(3))


def rotation_about_axis(axis, degrees: float) -> np.ndarray:
    """Rotation matrix for a right-handed rotation about a (non-zero) axis."""
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValueError("rotation axis must be non-zero")
    return exp_rotvec(axis / norm * np.deg2rad(degrees))


def exp_rotvec(w) -> np.ndarray:
    """Rodrigues map of a rotation vector (axis * angle, radians)."""
    w = np.asarray(w, dtype=np.float64)
    angle = np.linalg.norm(w)
    if angle < 1e-12:
        k = _skew(w)
        return np.eye(3) + k + 0.5 * (k @ k)
    k = _skew(w / angle)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def orthonormalize(rot: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (polar factor via SVD); keeps det +1."""
    u, _, vt = np.linalg.svd(rot)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def _skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
