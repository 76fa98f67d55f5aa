"""Acceptance suite: full-scale convergence studies plus the oracle checks.

Each criterion prints one PASS/FAIL line (run with ``pytest -s`` to see them
live). The three sweeps use 100 trials per cell and take a few minutes
combined; everything is seeded, so reruns are bit-identical.
"""

import numpy as np
import pytest

import checkercentre as cc
from checkercentre.harness import (
    METHOD_COLOURED,
    METHOD_POINT_TO_PLANE,
    SweepConfig,
    run_sweep,
)
from checkercentre.registration import photometric_residuals, point_to_plane_residuals
from checkercentre.transforms import exp_rotvec

from conftest import brute_force_nearest, brute_force_radius, otsu_oracle
from test_pipeline import build_noisy_scan, offset_guess

BASE_SEED = 0
SHIFTS = tuple(round(0.1 * i, 1) for i in range(16))
ROTATIONS = (0.0, 10.0, 20.0, 30.0)


def report(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{' — ' + detail if detail else ''}")
    return ok


@pytest.fixture(scope="module")
def spec():
    return cc.CheckerboardSpec()


@pytest.fixture(scope="module")
def shift_table(spec):
    cfg = SweepConfig(
        spec=spec,
        shift_fractions=SHIFTS,
        trials_per_cell=100,
        base_seed=BASE_SEED,
        methods=(METHOD_COLOURED, METHOD_POINT_TO_PLANE),
    )
    return run_sweep(cfg, workers=2)


@pytest.fixture(scope="module")
def rotation_table(spec):
    cfg = SweepConfig(
        spec=spec,
        shift_fractions=SHIFTS,
        rotation_degs=ROTATIONS,
        trials_per_cell=100,
        base_seed=BASE_SEED,
        methods=(METHOD_COLOURED,),
    )
    return run_sweep(cfg, workers=2)


@pytest.fixture(scope="module")
def noise_table(spec):
    sigmas = (0.0, 0.01 * spec.square_size, 0.02 * spec.square_size)
    cfg = SweepConfig(
        spec=spec,
        shift_fractions=SHIFTS,
        noise_sigmas=sigmas,
        trials_per_cell=100,
        base_seed=BASE_SEED,
        methods=(METHOD_COLOURED,),
    )
    return run_sweep(cfg, workers=2), sigmas


def test_shift_only_sweep(shift_table):
    rates = {(r.method, r.shift_fraction): r.success_rate for r in shift_table}
    rmses = {(r.method, r.shift_fraction): r.mean_rmse for r in shift_table}

    coloured_ok = all(rates[(METHOD_COLOURED, s)] >= 0.8 for s in SHIFTS if s <= 0.9)
    rmse_ok = all(rmses[(METHOD_COLOURED, s)] < 0.05 for s in SHIFTS if s <= 0.9)
    p2p_ok = all(rates[(METHOD_POINT_TO_PLANE, s)] < 0.2 for s in SHIFTS if s >= 0.3)

    worst_rate = min(rates[(METHOD_COLOURED, s)] for s in SHIFTS if s <= 0.9)
    worst_p2p = max(rates[(METHOD_POINT_TO_PLANE, s)] for s in SHIFTS if s >= 0.3)
    ok = report(
        "shift-only sweep",
        coloured_ok and rmse_ok and p2p_ok,
        f"coloured min rate to 90% = {worst_rate:.2f} (need >= 0.8), "
        f"p2p max rate from 30% = {worst_p2p:.2f} (need < 0.2)",
    )
    assert ok


def test_rotation_monotone_degradation(rotation_table):
    rates = {(r.shift_fraction, r.in_plane_deg): r.success_rate for r in rotation_table}
    cells = [s for s in SHIFTS if s >= 0.3]
    monotone = 0
    for s in cells:
        chain = [rates[(s, r)] for r in ROTATIONS]
        monotone += all(chain[i] >= chain[i + 1] for i in range(len(chain) - 1))
    fraction = monotone / len(cells)
    ok = report(
        "shift x rotation monotone degradation",
        fraction >= 0.9,
        f"monotone in {monotone}/{len(cells)} shift cells (need >= 90%)",
    )
    assert ok


def test_noise_shrinks_convergence_range(noise_table):
    table, sigmas = noise_table
    rates = {(r.shift_fraction, r.noise_sigma): r.success_rate for r in table}
    largest = []
    for sigma in sigmas:
        good = [s for s in SHIFTS if rates[(s, sigma)] >= 0.8]
        largest.append(max(good) if good else -1.0)
    ok = report(
        "noise sweep range",
        largest[0] >= largest[1] >= largest[2],
        f"largest shift with rate >= 0.8 per sigma: {largest}",
    )
    assert ok


def test_oracle_suites(rng):
    # Otsu vs exhaustive between-class-variance scan, 1000 random inputs
    otsu_checked = 0
    otsu_ok = True
    while otsu_checked < 1000:
        n = int(rng.integers(2, 300))
        values = rng.uniform(0, 1, n)
        if rng.uniform() < 0.3:
            values = np.round(values, 1)
        try:
            expected = otsu_oracle(values)
        except ValueError:
            continue
        otsu_ok &= cc.otsu_threshold(values) == expected
        otsu_checked += 1

    # KD-tree vs linear scan, 1000 random query cases
    kd_ok = True
    kd_checked = 0
    while kd_checked < 1000:
        pts = rng.uniform(-1, 1, (int(rng.integers(1, 300)), 3))
        index = cc.build_index(cc.PointCloud(pts))
        for _ in range(25):
            q = rng.uniform(-1.2, 1.2, 3)
            kd_ok &= cc.nearest(index, q) == brute_force_nearest(pts, q)
            kd_checked += 1
            radius = float(rng.uniform(0.05, 1.0))
            kd_ok &= cc.radius_neighbours(index, q, radius) == brute_force_radius(pts, q, radius)
            kd_checked += 1

    # solver Jacobians vs central finite differences at 20 random poses
    jac_ok = True
    h = 1e-6
    for _ in range(20):
        m = 50
        q0 = rng.uniform(-0.5, 0.5, (m, 3))
        tgt = rng.uniform(-0.5, 0.5, (m, 3))
        nrm = rng.normal(size=(m, 3))
        nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
        grad = rng.normal(size=(m, 3))
        grad -= np.einsum("ij,ij->i", grad, nrm)[:, None] * nrm
        src_int = rng.uniform(0, 1, m)
        tgt_int = rng.uniform(0, 1, m)

        def q_at(xi):
            return q0 @ exp_rotvec(xi[:3]).T + xi[3:]

        r_g, j_g = point_to_plane_residuals(q0, tgt, nrm)
        fd_g = np.column_stack([
            (point_to_plane_residuals(q_at(h * e), tgt, nrm)[0]
             - point_to_plane_residuals(q_at(-h * e), tgt, nrm)[0]) / (2 * h)
            for e in np.eye(6)
        ])
        jac_ok &= np.linalg.norm(j_g - fd_g) / np.linalg.norm(j_g) < 1e-5
        r_c, j_c = photometric_residuals(q0, src_int, tgt, nrm, tgt_int, grad)
        fd_c = np.column_stack([
            (photometric_residuals(q_at(h * e), src_int, tgt, nrm, tgt_int, grad)[0]
             - photometric_residuals(q_at(-h * e), src_int, tgt, nrm, tgt_int, grad)[0]) / (2 * h)
            for e in np.eye(6)
        ])
        jac_ok &= np.linalg.norm(j_c - fd_c) / np.linalg.norm(j_c) < 1e-5

    # RANSAC membership on the constructed plane + outlier fixture
    xy = rng.uniform(-0.5, 0.5, (1000, 2))
    plane_pts = np.column_stack([xy, rng.normal(0, 0.001, 1000)])
    out_xy = rng.uniform(-0.5, 0.5, (100, 2))
    outlier_pts = np.column_stack([out_xy, rng.uniform(0.05, 0.2, 100)])
    cloud = cc.PointCloud(np.vstack([plane_pts, outlier_pts]))
    _, mask = cc.ransac_plane(cloud, distance_threshold=0.005, iterations=200, seed=1)
    ransac_ok = mask[:1000].mean() >= 0.99 and mask[1000:].sum() == 0

    ok = report(
        "oracle suites",
        otsu_ok and kd_ok and jac_ok and ransac_ok,
        f"otsu {otsu_checked} cases, kd {kd_checked} cases, jacobians 20 poses, "
        f"ransac inliers {mask[:1000].mean():.3f} true / {int(mask[1000:].sum())} false",
    )
    assert ok


def test_end_to_end_measurement(tmp_path):
    side = 0.4
    rng = np.random.default_rng(BASE_SEED)
    scan, centre, pose = build_noisy_scan(rng, side=side)
    path = tmp_path / "scan.ply"
    cc.write_point_cloud(scan, path, "ply-binary")
    crop = cc.Aabb(scan.points.min(axis=0) - 0.05, scan.points.max(axis=0) + 0.05)
    base = dict(
        input_path=path,
        physical_side=side,
        crop=crop,
        init_pose=offset_guess(pose, side),
        seed=3,
    )
    with_pre = cc.measure_target(cc.MeasureConfig(**base, preprocess=True))
    without_pre = cc.measure_target(cc.MeasureConfig(**base, preprocess=False))
    err_with = float(np.linalg.norm(with_pre.centre - centre)) / side
    err_without = float(np.linalg.norm(without_pre.centre - centre)) / side
    ok = report(
        "end-to-end synthetic measurement",
        err_with < 0.02 and err_with < err_without,
        f"centre error {err_with:.4f} of side (need < 0.02); "
        f"preprocessing off -> {err_without:.4f} (must be strictly larger)",
    )
    assert ok
