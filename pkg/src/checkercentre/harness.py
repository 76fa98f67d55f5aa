"""Seeded experiment engine: single trials, shift x rotation x noise sweeps
and their per-cell statistics, emitted as CSV.

A trial builds the template, applies a seeded pose perturbation to the source
copy, optionally noises the target copy and registers with the selected
solver from an identity initialisation. Success requires both criteria: the
normalized RMSE stays below 0.15 of the side length and the colour matching
score exceeds 0.5.

Per-trial seeds are stable hashes of (base seed, cell coordinates, trial
index), so results never depend on the grid shape or on how many workers the
sweep runs with.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .registration import (
    ColouredIcpParams,
    IcpParams,
    coloured_icp,
    colour_score,
    icp_point_to_plane,
)
from .synth import CheckerboardSpec, NoiseSpec, Perturbation, add_noise, generate_checkerboard, perturbation_to_transform
from .transforms import RigidTransform, apply_transform, target_centre

RMSE_SUCCESS_LIMIT = 0.15
COLOUR_SUCCESS_LIMIT = 0.5

METHOD_POINT_TO_PLANE = "point-to-plane"
METHOD_COLOURED = "coloured"
_METHOD_IDS = {METHOD_POINT_TO_PLANE: 0, METHOD_COLOURED: 1}

CSV_COLUMNS = (
    "method",
    "shift_fraction",
    "in_plane_deg",
    "out_plane_deg",
    "noise_sigma",
    "trials",
    "success_rate",
    "mean_rmse",
    "std_rmse",
    "mean_centre_error",
    "mean_iterations",
)


def default_icp_params(spec: CheckerboardSpec) -> ColouredIcpParams:
    """Trial defaults scaled to the template.

    The correspondence gate of one fifth of the side length covers the
    lattice interleave and local walking at any overlapping pose while
    leaving non-overlapping starts (gap larger than the gate) without
    correspondences, which is how they fail. The colour score is gated at
    one point spacing so only genuinely coincident pattern points count; the
    gradient radius of half a square gives the photometric term the reach to
    pull the template home across the whole board. The initial-fitness floor
    of 0.26 encodes the known-approximate-location assumption: a start at
    90% shift still matches at least 28.6% of the template through this
    gate, while no-overlap starts (100% shift and beyond, rotations to 30
    degrees included) match at most 24.3%.
    """
    side = spec.side_length
    return ColouredIcpParams(
        base=IcpParams(
            max_correspondence_distance=0.2 * side,
            max_iterations=80,
            normalization_scale=side,
            min_initial_fitness=0.26,
        ),
        gradient_radius=0.5 * spec.square_size,
        score_max_distance=spec.point_spacing,
    )


@dataclass(frozen=True)
class TrialConfig:
    spec: CheckerboardSpec
    shift_fraction: float
    in_plane_deg: float
    out_plane_deg: float
    noise: NoiseSpec
    method: str
    icp: ColouredIcpParams
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.shift_fraction <= 1.5:
            raise ValueError("shift_fraction must lie in [0, 1.5]")
        if self.method not in _METHOD_IDS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class TrialRecord:
    config: TrialConfig
    normalized_rmse: float
    colour_score: float
    centre_error_m: float
    centre_error_frac: float
    geometric_success: bool
    colour_success: bool
    success: bool
    iterations: int
    wall_time: float
    fitness: float = 0.0
    converged: bool = False
    error: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    spec: CheckerboardSpec
    shift_fractions: Sequence[float]
    rotation_degs: Sequence[float] = (0.0,)
    noise_sigmas: Sequence[float] = (0.0,)
    trials_per_cell: int = 100
    base_seed: int = 0
    methods: Sequence[str] = (METHOD_COLOURED,)
    icp: ColouredIcpParams | None = None
    intensity_sigma: float = 0.0

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")
        for grid in (self.shift_fractions, self.rotation_degs, self.noise_sigmas, self.methods):
            if len(grid) == 0:
                raise ValueError("sweep grids must be non-empty")
        for m in self.methods:
            if m not in _METHOD_IDS:
                raise ValueError(f"unknown method {m!r}")


@dataclass(frozen=True)
class CellStats:
    """Aggregate of one sweep cell. RMSE and centre-error statistics cover
    successful trials only (nan when the cell has none); iteration counts
    cover every trial."""

    method: str
    shift_fraction: float
    in_plane_deg: float
    out_plane_deg: float
    noise_sigma: float
    trials: int
    success_rate: float
    mean_rmse: float
    std_rmse: float
    mean_centre_error: float
    mean_iterations: float


def trial_seed(base_seed: int, shift: float, index: int) -> int:
    """Stable seed for a trial's pose draws (shift direction, rotation axis).

    Deliberately independent of method, rotation magnitude and noise level:
    every cell that differs only in those coordinates replays the same poses,
    so method comparisons are paired and the degradation properties (more
    rotation, more noise) are checked pathwise rather than across unrelated
    random draws. Coordinates are quantised, so adding grid cells never
    perturbs existing ones.
    """
    entropy = [int(base_seed), int(round(shift * 1_000_000)), int(index)]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def noise_seed(base_seed: int, shift: float, rotation: float, sigma: float, index: int) -> int:
    """Stable seed for a trial's noise draws (full cell coordinates)."""
    entropy = [
        int(base_seed),
        int(round(shift * 1_000_000)),
        int(round(rotation * 1_000_000)),
        int(round(sigma * 1_000_000_000)),
        int(index),
        1,
    ]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def run_trial(cfg: TrialConfig) -> TrialRecord:
    """One seeded experiment; solver errors come back as a failed record."""
    start = time.perf_counter()
    spec = cfg.spec
    side = spec.side_length

    streams = np.random.SeedSequence(cfg.seed).generate_state(2)
    direction_rng = np.random.default_rng(int(streams[0]))
    angle = direction_rng.uniform(0.0, 2.0 * np.pi)
    pert = Perturbation(
        shift_fraction=cfg.shift_fraction,
        shift_direction=(math.cos(angle), math.sin(angle)),
        in_plane_deg=cfg.in_plane_deg,
        out_plane_deg=cfg.out_plane_deg,
        seed=int(streams[1]),
    )

    template = generate_checkerboard(spec)
    true_pose = perturbation_to_transform(pert, spec)
    source = apply_transform(template, true_pose)
    target = add_noise(template, cfg.noise)

    try:
        if cfg.method == METHOD_COLOURED:
            result = coloured_icp(source, target, RigidTransform.identity(), cfg.icp)
        else:
            result = icp_point_to_plane(source, target, RigidTransform.identity(), cfg.icp.base)
        gate = cfg.icp.score_max_distance or cfg.icp.base.max_correspondence_distance
        score = colour_score(source, target, result.transform, gate)
    except Exception as exc:  # propagate as diagnostics, not a crash
        return TrialRecord(
            config=cfg,
            normalized_rmse=float("inf"),
            colour_score=0.0,
            centre_error_m=float("inf"),
            centre_error_frac=float("inf"),
            geometric_success=False,
            colour_success=False,
            success=False,
            iterations=0,
            wall_time=time.perf_counter() - start,
            error=f"{type(exc).__name__}: {exc}",
        )

    # the target is the unshifted template, so the true centre is the origin
    measured = target_centre(result.transform, true_pose.apply(np.zeros(3)))
    centre_error = float(np.linalg.norm(measured))
    geometric_success = result.normalized_rmse < RMSE_SUCCESS_LIMIT
    colour_success = score > COLOUR_SUCCESS_LIMIT
    return TrialRecord(
        config=cfg,
        normalized_rmse=result.normalized_rmse,
        colour_score=score,
        centre_error_m=centre_error,
        centre_error_frac=centre_error / side,
        geometric_success=geometric_success,
        colour_success=colour_success,
        success=geometric_success and colour_success,
        iterations=result.iterations,
        wall_time=time.perf_counter() - start,
        fitness=result.fitness,
        converged=result.converged,
    )


def _cell_key(cell) -> tuple:
    method, shift, rotation, sigma = cell
    return (method, shift, rotation, sigma)


def _run_cell(args) -> CellStats:
    cfg, cell = args
    method, shift, rotation, sigma = cell
    params = cfg.icp if cfg.icp is not None else default_icp_params(cfg.spec)
    records = []
    for t in range(cfg.trials_per_cell):
        seed = trial_seed(cfg.base_seed, shift, t)
        noise = NoiseSpec(
            position_sigma=sigma,
            intensity_sigma=cfg.intensity_sigma,
            seed=noise_seed(cfg.base_seed, shift, rotation, sigma, t),
        )
        trial = TrialConfig(
            spec=cfg.spec,
            shift_fraction=shift,
            in_plane_deg=rotation,
            out_plane_deg=rotation,
            noise=noise,
            method=method,
            icp=params,
            seed=seed,
        )
        records.append(run_trial(trial))

    wins = [r for r in records if r.success]
    rmse = np.array([r.normalized_rmse for r in wins])
    errs = np.array([r.centre_error_frac for r in wins])
    return CellStats(
        method=method,
        shift_fraction=shift,
        in_plane_deg=rotation,
        out_plane_deg=rotation,
        noise_sigma=sigma,
        trials=cfg.trials_per_cell,
        success_rate=len(wins) / cfg.trials_per_cell,
        mean_rmse=float(rmse.mean()) if len(wins) else float("nan"),
        std_rmse=float(rmse.std()) if len(wins) else float("nan"),
        mean_centre_error=float(errs.mean()) if len(wins) else float("nan"),
        mean_iterations=float(np.mean([r.iterations for r in records])),
    )


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[CellStats]:
    """Every cell of the method x shift x rotation x noise grid, each with
    ``trials_per_cell`` seeded trials. Output is sorted canonically so the
    table is identical for any worker count."""
    cells = [
        (method, float(shift), float(rotation), float(sigma))
        for method in cfg.methods
        for shift in cfg.shift_fractions
        for rotation in cfg.rotation_degs
        for sigma in cfg.noise_sigmas
    ]
    cells.sort(key=_cell_key)
    jobs = [(cfg, cell) for cell in cells]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(_run_cell, jobs))
    else:
        stats = [_run_cell(job) for job in jobs]
    return stats


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(table: Sequence[CellStats], path) -> None:
    """CSV per the documented schema: UTF-8, header row, '.' decimal,
    newline-terminated; floats use shortest round-trip formatting so
    re-reading reproduces the table exactly."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in table:
                writer.writerow(
                    [
                        row.method,
                        _format_value(row.shift_fraction),
                        _format_value(row.in_plane_deg),
                        _format_value(row.out_plane_deg),
                        _format_value(row.noise_sigma),
                        row.trials,
                        _format_value(row.success_rate),
                        _format_value(row.mean_rmse),
                        _format_value(row.std_rmse),
                        _format_value(row.mean_centre_error),
                        _format_value(row.mean_iterations),
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path) -> list[CellStats]:
    """Inverse of :func:`write_results`."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if tuple(header or ()) != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header in {path}: {header}")
            rows = []
            for record in reader:
                if len(record) != len(CSV_COLUMNS):
                    raise ValueError(f"malformed CSV row in {path}: {record}")
                rows.append(
                    CellStats(
                        method=record[0],
                        shift_fraction=float(record[1]),
                        in_plane_deg=float(record[2]),
                        out_plane_deg=float(record[3]),
                        noise_sigma=float(record[4]),
                        trials=int(record[5]),
                        success_rate=float(record[6]),
                        mean_rmse=float(record[7]),
                        std_rmse=float(record[8]),
                        mean_centre_error=float(record[9]),
                        mean_iterations=float(record[10]),
                    )
                )
            return rows
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
