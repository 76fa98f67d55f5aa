"""The two matching solvers: point-to-plane ICP for coarse alignment and a
two-term coloured ICP (geometry + intensity on the target's tangent planes)
for the precise centre measurement, plus the colour matching score used to
classify a trial.

Both solvers run the same damped Gauss-Newton loop over a 6-parameter pose
(rotation vector + translation, applied as a left increment each iteration
and re-orthonormalised). A step that fails to lower the current objective is
halved up to 8 times; if no decrease is possible the solver stops, so the
per-iteration objective never increases on clean data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .neighbours import NeighbourIndex
from .transforms import RigidTransform, exp_rotvec, orthonormalize

_STEP_HALVINGS = 8
_ZERO_STEP = 1e-14


@dataclass(frozen=True)
class IcpParams:
    """Correspondence gate and stopping rules shared by both solvers.

    ``normalization_scale`` is the template side length used to express the
    reported RMSE as a fraction of the target size; when omitted, the largest
    bounding-box side of the source at its input pose is used.

    ``min_initial_fitness`` is an overlap precondition: when the starting
    pose matches less than this fraction of the source, the solver refuses
    the problem (converged false) instead of wandering. Template matching
    assumes the approximate target location is already known, so a start
    with no real overlap is a detection failure, not a registration task.
    """

    max_correspondence_distance: float
    max_iterations: int = 50
    relative_rmse_tol: float = 1e-6
    relative_fitness_tol: float = 1e-6
    normalization_scale: float | None = None
    min_initial_fitness: float = 0.0

    def __post_init__(self):
        if self.max_correspondence_distance <= 0.0:
            raise ValueError("max_correspondence_distance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.relative_rmse_tol <= 0.0 or self.relative_fitness_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 <= self.min_initial_fitness <= 1.0:
            raise ValueError("min_initial_fitness must lie in [0, 1]")


@dataclass(frozen=True)
class ColouredIcpParams:
    """Two-term solver settings.

    ``geometric_weight`` balances the geometric and photometric terms (the
    widely used default 0.968). ``score_max_distance`` gates which
    correspondences count toward the colour matching score; it defaults to
    the correspondence distance, but classification works best with a gate of
    a few point spacings so that non-overlapping points do not dilute the
    score.
    """

    base: IcpParams
    gradient_radius: float
    geometric_weight: float = 0.968
    gradient_min_neighbours: int = 4
    score_max_distance: float | None = None

    def __post_init__(self):
        if not 0.0 < self.geometric_weight < 1.0:
            raise ValueError("geometric_weight must lie in (0, 1)")
        if self.gradient_radius <= 0.0:
            raise ValueError("gradient_radius must be positive")


@dataclass(frozen=True)
class RegistrationResult:
    """Final pose plus the quantities the success criteria are built from.

    ``objective_history`` holds one (before, after) pair per iteration: the
    stacked objective over that iteration's correspondences at the incoming
    pose and at the accepted step. Step-halving guarantees after <= before;
    re-matching between iterations may lift the next "before".
    """

    transform: RigidTransform
    normalized_rmse: float
    colour_score: float
    fitness: float
    iterations: int
    converged: bool
    objective_history: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class ColourGradientField:
    """Per-point intensity gradient on each point's tangent plane."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("gradient field must have shape (n, 3)")
        object.__setattr__(self, "vectors", v)


def _tangent_bases(normals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal in-plane bases (e1, e2) for an (n, 3) array of unit normals."""
    pick = np.argmin(np.abs(normals), axis=1)
    axes = np.zeros_like(normals)
    axes[np.arange(len(normals)), pick] = 1.0
    e1 = np.cross(normals, axes)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    return e1, np.cross(normals, e1)


def compute_colour_gradients(
    cloud: PointCloud, radius: float, min_neighbours: int = 4
) -> ColourGradientField:
    """Least-squares fit of the intensity slope over each point's radius
    neighbourhood, solved in the 2D tangent basis so the gradient is exactly
    orthogonal to the point's normal. Points with fewer than
    ``min_neighbours`` neighbours, or with a degenerate (collinear)
    neighbourhood, get the zero gradient."""
    if cloud.intensity is None:
        raise ValueError("missing intensity")
    if cloud.normals is None:
        raise ValueError("missing normals")
    if radius <= 0.0:
        raise ValueError("radius must be positive")

    tree = NeighbourIndex(cloud)
    neighbourhoods = tree._tree.query_ball_point(cloud.points, radius)
    points = cloud.points
    intensity = cloud.intensity
    normals = cloud.normals
    n_pts = len(cloud)

    counts = np.array([len(ids) - 1 for ids in neighbourhoods])
    centre_ids = np.repeat(np.arange(n_pts), [len(ids) for ids in neighbourhoods])
    neighbour_ids = np.fromiter(
        (j for ids in neighbourhoods for j in ids), dtype=np.intp, count=int(centre_ids.size)
    )
    keep = centre_ids != neighbour_ids
    centre_ids, neighbour_ids = centre_ids[keep], neighbour_ids[keep]

    e1, e2 = _tangent_bases(normals)
    offsets = points[neighbour_ids] - points[centre_ids]
    n_c = normals[centre_ids]
    offsets = offsets - np.einsum("ij,ij->i", offsets, n_c)[:, None] * n_c
    a1 = np.einsum("ij,ij->i", offsets, e1[centre_ids])
    a2 = np.einsum("ij,ij->i", offsets, e2[centre_ids])
    b = intensity[neighbour_ids] - intensity[centre_ids]

    s11 = np.bincount(centre_ids, weights=a1 * a1, minlength=n_pts)
    s12 = np.bincount(centre_ids, weights=a1 * a2, minlength=n_pts)
    s22 = np.bincount(centre_ids, weights=a2 * a2, minlength=n_pts)
    t1 = np.bincount(centre_ids, weights=a1 * b, minlength=n_pts)
    t2 = np.bincount(centre_ids, weights=a2 * b, minlength=n_pts)

    det = s11 * s22 - s12 * s12
    solvable = (counts >= min_neighbours) & (det > 1e-12 * np.maximum(s11 * s22, 1e-300))
    alpha = np.zeros(n_pts)
    beta = np.zeros(n_pts)
    alpha[solvable] = (s22[solvable] * t1[solvable] - s12[solvable] * t2[solvable]) / det[solvable]
    beta[solvable] = (s11[solvable] * t2[solvable] - s12[solvable] * t1[solvable]) / det[solvable]
    gradients = alpha[:, None] * e1 + beta[:, None] * e2

    # intensity spans at most [0, 1] across the neighbourhood, so any slope
    # beyond 2/radius is a fitting artefact (near-coincident neighbours);
    # left unclamped such rows would dominate the solver quadratically
    limit = 2.0 / radius
    norms = np.linalg.norm(gradients, axis=1)
    overshoot = norms > limit
    if overshoot.any():
        gradients[overshoot] *= (limit / norms[overshoot])[:, None]
    return ColourGradientField(gradients)


def point_to_plane_residuals(
    q: np.ndarray, target_points: np.ndarray, target_normals: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Plane residuals r = (q - p) . n and their Jacobian w.r.t. the
    6-vector pose increment (rotation vector, translation)."""
    r = np.einsum("ij,ij->i", q - target_points, target_normals)
    jac = np.hstack([np.cross(q, target_normals), target_normals])
    return r, jac


def photometric_residuals(
    q: np.ndarray,
    source_intensity: np.ndarray,
    target_points: np.ndarray,
    target_normals: np.ndarray,
    target_intensity: np.ndarray,
    target_gradients: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Intensity residuals against the target's tangent-plane colour model:
    r = C(p) + d . (q' - p) - C_source, with q' the projection of q onto the
    tangent plane at p. The Jacobian form relies on d being orthogonal to the
    point normal, which the gradient construction guarantees."""
    offset = q - target_points
    along = np.einsum("ij,ij->i", offset, target_normals)
    tangential = offset - along[:, None] * target_normals
    r = (
        target_intensity
        + np.einsum("ij,ij->i", target_gradients, tangential)
        - source_intensity
    )
    jac = np.hstack([np.cross(q, target_gradients), target_gradients])
    return r, jac


def _source_scale(points: np.ndarray) -> float:
    if len(points) == 0:
        return 1.0
    extent = float(np.max(points.max(axis=0) - points.min(axis=0)))
    return extent if extent > 0.0 else 1.0


class _Objective:
    """Weighted residual stack over a fixed correspondence set."""

    def __init__(self, src_pts, src_int, target, gradients, geometric_weight):
        self.src_pts = src_pts
        self.src_int = src_int
        self.tgt_pts = target.points
        self.tgt_nrm = target.normals
        self.tgt_int = target.intensity
        self.gradients = gradients
        if gradients is None:
            self.w_geo, self.w_col = 1.0, 0.0
        else:
            self.w_geo = np.sqrt(geometric_weight)
            self.w_col = np.sqrt(1.0 - geometric_weight)

    def rows(self, rotation, translation, src_ids, tgt_ids):
        q = self.src_pts[src_ids] @ rotation.T + translation
        r_g, j_g = point_to_plane_residuals(q, self.tgt_pts[tgt_ids], self.tgt_nrm[tgt_ids])
        if self.gradients is None:
            return r_g, j_g
        r_c, j_c = photometric_residuals(
            q,
            self.src_int[src_ids],
            self.tgt_pts[tgt_ids],
            self.tgt_nrm[tgt_ids],
            self.tgt_int[tgt_ids],
            self.gradients[tgt_ids],
        )
        r = np.concatenate([self.w_geo * r_g, self.w_col * r_c])
        jac = np.vstack([self.w_geo * j_g, self.w_col * j_c])
        return r, jac

    def value(self, rotation, translation, src_ids, tgt_ids):
        r, _ = self.rows(rotation, translation, src_ids, tgt_ids)
        return float(r @ r)


def _gauss_newton_icp(source, target, init, params, objective):
    tree = NeighbourIndex(target)
    src_pts = source.points
    n_src = len(src_pts)
    scale = params.normalization_scale or _source_scale(src_pts)
    corr = params.max_correspondence_distance

    rotation, translation = init.rotation, init.translation
    prev_nrmse = prev_fitness = None
    converged = False
    history = []
    iterations = 0
    src_ids_all = np.arange(n_src)

    for iterations in range(1, params.max_iterations + 1):
        q = src_pts @ rotation.T + translation
        dist, idx = tree.query_batch(q)
        mask = dist <= corr
        if not mask.any():
            return _finish(rotation, translation, np.inf, 0.0, iterations, False, history)
        fitness = float(mask.sum()) / n_src
        nrmse = float(np.sqrt(np.mean(dist[mask] ** 2))) / scale
        if iterations == 1 and fitness < params.min_initial_fitness:
            return _finish(rotation, translation, nrmse, fitness, 1, False, history)
        if (
            prev_nrmse is not None
            and abs(nrmse - prev_nrmse) < params.relative_rmse_tol
            and abs(fitness - prev_fitness) < params.relative_fitness_tol
        ):
            converged = True
            break
        prev_nrmse, prev_fitness = nrmse, fitness

        src_ids = src_ids_all[mask]
        tgt_ids = idx[mask]
        r, jac = objective.rows(rotation, translation, src_ids, tgt_ids)
        energy = float(r @ r)

        delta, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        if np.linalg.norm(delta) < _ZERO_STEP:
            history.append((energy, energy))
            converged = True
            break

        accepted = None
        for halving in range(_STEP_HALVINGS + 1):
            step = delta * (0.5 ** halving)
            rot_inc = exp_rotvec(step[:3])
            cand_rot = orthonormalize(rot_inc @ rotation)
            cand_tra = rot_inc @ translation + step[3:]
            cand_energy = objective.value(cand_rot, cand_tra, src_ids, tgt_ids)
            if cand_energy < energy:
                rotation, translation = cand_rot, cand_tra
                accepted = cand_energy
                break
        if accepted is None:
            history.append((energy, energy))
            converged = True
            break
        history.append((energy, accepted))

    # report the state of the final pose
    q = src_pts @ rotation.T + translation
    dist, _ = tree.query_batch(q)
    mask = dist <= corr
    if not mask.any():
        return _finish(rotation, translation, np.inf, 0.0, iterations, False, history)
    fitness = float(mask.sum()) / n_src
    nrmse = float(np.sqrt(np.mean(dist[mask] ** 2))) / scale
    return _finish(rotation, translation, nrmse, fitness, iterations, converged, history)


def _finish(rotation, translation, nrmse, fitness, iterations, converged, history):
    return (
        RigidTransform(orthonormalize(rotation), translation),
        nrmse,
        fitness,
        iterations,
        converged,
        tuple(history),
    )


def icp_point_to_plane(
    source: PointCloud,
    target: PointCloud,
    init: RigidTransform,
    params: IcpParams,
) -> RegistrationResult:
    """Minimise the sum of squared point-to-plane residuals against the
    target's normals, starting from ``init``.

    The reported RMSE is the root mean square of the inlier correspondence
    distances at the final pose, divided by the template side length.
    """
    if len(source) == 0:
        raise ValueError("source cloud is empty")
    if target.normals is None:
        raise ValueError("target lacks normals")
    objective = _Objective(source.points, None, target, None, 1.0)
    transform, nrmse, fitness, iterations, converged, history = _gauss_newton_icp(
        source, target, init, params, objective
    )
    score = 0.0
    if source.intensity is not None and target.intensity is not None:
        score = colour_score(source, target, transform, params.max_correspondence_distance)
    return RegistrationResult(
        transform=transform,
        normalized_rmse=nrmse,
        colour_score=score,
        fitness=fitness,
        iterations=iterations,
        converged=converged,
        objective_history=history,
    )


def coloured_icp(
    source: PointCloud,
    target: PointCloud,
    init: RigidTransform,
    params: ColouredIcpParams,
) -> RegistrationResult:
    """Joint minimisation of the point-to-plane term and the tangent-plane
    intensity term, weighted geometric_weight : (1 - geometric_weight), over
    one stacked Gauss-Newton system per iteration."""
    if len(source) == 0:
        raise ValueError("source cloud is empty")
    if source.intensity is None or target.intensity is None:
        raise ValueError("missing intensity")
    if target.normals is None:
        raise ValueError("target lacks normals")
    gradients = compute_colour_gradients(
        target, params.gradient_radius, params.gradient_min_neighbours
    )
    objective = _Objective(
        source.points, source.intensity, target, gradients.vectors, params.geometric_weight
    )
    transform, nrmse, fitness, iterations, converged, history = _gauss_newton_icp(
        source, target, init, params.base, objective
    )
    gate = params.score_max_distance or params.base.max_correspondence_distance
    score = colour_score(source, target, transform, gate)
    return RegistrationResult(
        transform=transform,
        normalized_rmse=nrmse,
        colour_score=score,
        fitness=fitness,
        iterations=iterations,
        converged=converged,
        objective_history=history,
    )


def _binarized(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        values = (values - lo) / (hi - lo)
    return values >= 0.5


def colour_score(
    source: PointCloud,
    target: PointCloud,
    transform: RigidTransform,
    max_distance: float,
) -> float:
    """Fraction of source points whose binarized intensity agrees with their
    nearest target point within ``max_distance`` under the given pose.

    Source points with no target neighbour inside the gate count as
    disagreements, so the score measures how much of the pattern actually
    coincides: identical aligned clouds score 1, inverted ones 0, and a pose
    with no correspondences at all scores 0.
    """
    if source.intensity is None or target.intensity is None:
        raise ValueError("missing intensity")
    tree = NeighbourIndex(target)
    q = transform.apply(source.points)
    dist, idx = tree.query_batch(q)
    mask = dist <= max_distance
    if not mask.any():
        return 0.0
    src_bits = _binarized(source.intensity)[mask]
    tgt_bits = _binarized(target.intensity)[idx[mask]]
    return float(np.count_nonzero(src_bits == tgt_bits)) / len(source)


def coloured_icp_multiscale(
    source: PointCloud,
    target: PointCloud,
    init: RigidTransform,
    params: ColouredIcpParams,
    schedule,
) -> RegistrationResult:
    """Optional coarse-to-fine wrapper (off by default everywhere).

    ``schedule`` is a sequence of (voxel_size, max_correspondence_distance,
    max_iterations) stages; voxel_size 0 means full resolution, and the last
    stage should be full resolution so the reported metrics refer to the
    original clouds.
    """
    from dataclasses import replace

    from .preprocess import voxel_downsample

    pose = init
    result = None
    for voxel, corr, iters in schedule:
        src = voxel_downsample(source, voxel) if voxel > 0.0 else source
        tgt = voxel_downsample(target, voxel) if voxel > 0.0 else target
        stage = replace(
            params,
            base=replace(params.base, max_correspondence_distance=corr, max_iterations=iters),
        )
        result = coloured_icp(src, tgt, pose, stage)
        pose = result.transform
    if result is None:
        raise ValueError("empty multiscale schedule")
    return result
