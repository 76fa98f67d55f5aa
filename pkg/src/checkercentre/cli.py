"""Command-line surface: template generation, simulation sweeps, the real
data measurement pipeline and individual preprocessing steps.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 measurement
completed but unverified (failed a success criterion).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .io import read_point_cloud, write_point_cloud
from .pipeline import MeasureConfig, PipelineError, measure_target
from .preprocess import Aabb, binarize_intensity, crop_aabb, otsu_threshold, remove_outliers, stretch_intensity
from .registration import ColouredIcpParams, IcpParams
from .synth import CheckerboardSpec, generate_checkerboard
from .transforms import RigidTransform

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_UNVERIFIED = 3


def _parse_floats(text: str, expected: int, flag: str) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != expected:
        raise ValueError(f"{flag} expects {expected} comma-separated numbers")
    return [float(p) for p in parts]


def read_config(path) -> dict[str, str]:
    """Flat key=value file; blank lines and '#' comments are skipped."""
    values: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {line_no}: expected key=value")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.replace(",", " ").split() if p]


def sweep_config_from_file(path, seed_override=None) -> tuple[harness.SweepConfig, int]:
    """Build a SweepConfig from a key=value file; returns (config, workers)."""
    raw = read_config(path)
    spec = CheckerboardSpec(
        squares_per_side=int(raw.get("squares", 2)),
        square_size=float(raw.get("square_size", 0.1)),
        point_spacing=float(raw.get("spacing", 0.01)),
    )
    icp = None
    icp_keys = {
        "max_correspondence_distance",
        "max_iterations",
        "geometric_weight",
        "gradient_radius",
        "score_max_distance",
        "min_initial_fitness",
    }
    if icp_keys & raw.keys():
        # overrides layer onto the calibrated defaults, so e.g. raising
        # max_iterations does not silently drop the overlap precondition
        defaults = harness.default_icp_params(spec)
        base = IcpParams(
            max_correspondence_distance=float(
                raw.get("max_correspondence_distance", defaults.base.max_correspondence_distance)
            ),
            max_iterations=int(raw.get("max_iterations", defaults.base.max_iterations)),
            normalization_scale=spec.side_length,
            min_initial_fitness=float(
                raw.get("min_initial_fitness", defaults.base.min_initial_fitness)
            ),
        )
        icp = ColouredIcpParams(
            base=base,
            gradient_radius=float(raw.get("gradient_radius", defaults.gradient_radius)),
            geometric_weight=float(raw.get("geometric_weight", defaults.geometric_weight)),
            score_max_distance=float(raw.get("score_max_distance", defaults.score_max_distance)),
        )
    cfg = harness.SweepConfig(
        spec=spec,
        shift_fractions=_float_list(raw.get("shifts", "0")),
        rotation_degs=_float_list(raw.get("rotations", "0")),
        noise_sigmas=_float_list(raw.get("noise_sigmas", "0")),
        trials_per_cell=int(raw.get("trials", 100)),
        base_seed=int(seed_override if seed_override is not None else raw.get("seed", 0)),
        methods=tuple(m for m in raw.get("methods", harness.METHOD_COLOURED).replace(",", " ").split() if m),
        icp=icp,
        intensity_sigma=float(raw.get("intensity_sigma", 0.0)),
    )
    return cfg, int(raw.get("workers", 1))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="checkercentre",
        description="Checkerboard target centre measurement in unordered point clouds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="emit a synthetic checkerboard template cloud")
    p_synth.add_argument("--squares", type=int, default=2, help="squares per side (even)")
    p_synth.add_argument("--square-size", type=float, default=0.1, help="square edge in metres")
    p_synth.add_argument("--spacing", type=float, default=0.01, help="grid spacing in metres")
    p_synth.add_argument("--black", type=float, default=0.0)
    p_synth.add_argument("--white", type=float, default=1.0)
    p_synth.add_argument("--out", required=True, help="output cloud path")
    p_synth.add_argument("--format", default="auto", choices=["auto", "ply-binary", "ply-ascii", "xyzi"])

    p_sweep = sub.add_parser("sweep", help="run a shift/rotation/noise sweep from a config file")
    p_sweep.add_argument("--config", required=True, help="key=value config file (see README)")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config base seed")
    p_sweep.add_argument("--workers", type=int, default=None, help="parallel cells (default from config)")

    p_measure = sub.add_parser("measure", help="measure a target centre in a scan")
    p_measure.add_argument("--input", required=True)
    p_measure.add_argument("--side", type=float, required=True, help="physical side length in metres")
    p_measure.add_argument("--squares", type=int, default=2)
    p_measure.add_argument("--crop", default=None, help="minx,miny,minz,maxx,maxy,maxz")
    p_measure.add_argument("--template-spacing", type=float, default=None)
    p_measure.add_argument("--ransac-threshold", type=float, default=0.005)
    p_measure.add_argument("--ransac-iterations", type=int, default=500)
    p_measure.add_argument("--otsu-bins", type=int, default=256)
    p_measure.add_argument("--seed", type=int, default=0)
    p_measure.add_argument("--max-corr", type=float, default=None, help="correspondence gate in metres")
    p_measure.add_argument("--gradient-radius", type=float, default=None)
    p_measure.add_argument("--geometric-weight", type=float, default=0.968)
    p_measure.add_argument("--max-iterations", type=int, default=50)
    p_measure.add_argument("--init-pose", default=None,
                           help="12 numbers: rotation rows then translation")
    p_measure.add_argument("--no-preprocess", action="store_true",
                           help="skip RANSAC outlier removal and Otsu binarisation")
    p_measure.add_argument("--out", default=None, help="report path (default: stdout)")
    p_measure.add_argument("--aligned-out", default=None, help="write the aligned template cloud")
    p_measure.add_argument("--format", default="auto", choices=["auto", "ply-binary", "ply-ascii", "xyzi"])

    p_pre = sub.add_parser("preprocess", help="apply crop / RANSAC / binarisation individually")
    p_pre.add_argument("--input", required=True)
    p_pre.add_argument("--out", required=True)
    p_pre.add_argument("--crop", default=None, help="minx,miny,minz,maxx,maxy,maxz")
    p_pre.add_argument("--ransac-threshold", type=float, default=None,
                       help="run RANSAC outlier removal with this threshold (metres)")
    p_pre.add_argument("--ransac-iterations", type=int, default=500)
    p_pre.add_argument("--seed", type=int, default=0)
    p_pre.add_argument("--binarize", action="store_true", help="Otsu-threshold the intensity")
    p_pre.add_argument("--otsu-bins", type=int, default=256)
    p_pre.add_argument("--format", default="auto", choices=["auto", "ply-binary", "ply-ascii", "xyzi"])
    return parser


def _cmd_synth(args) -> int:
    spec = CheckerboardSpec(
        squares_per_side=args.squares,
        square_size=args.square_size,
        point_spacing=args.spacing,
        black_value=args.black,
        white_value=args.white,
    )
    cloud = generate_checkerboard(spec)
    write_point_cloud(cloud, args.out, args.format)
    print(f"wrote {len(cloud)} points to {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg, workers = sweep_config_from_file(args.config, args.seed)
    if args.workers is not None:
        workers = args.workers
    table = harness.run_sweep(cfg, workers=workers)
    harness.write_results(table, args.out)
    print(f"wrote {len(table)} cells to {args.out}")
    return EXIT_OK


def _cmd_measure(args) -> int:
    crop = None
    if args.crop:
        values = _parse_floats(args.crop, 6, "--crop")
        crop = Aabb(values[:3], values[3:])
    icp = None
    if args.max_corr is not None or args.gradient_radius is not None:
        side = args.side
        base = IcpParams(
            max_correspondence_distance=args.max_corr if args.max_corr is not None else side,
            max_iterations=args.max_iterations,
            normalization_scale=side,
        )
        icp = ColouredIcpParams(
            base=base,
            gradient_radius=(
                args.gradient_radius
                if args.gradient_radius is not None
                else 0.5 * side / args.squares
            ),
            geometric_weight=args.geometric_weight,
        )
    init_pose = None
    if args.init_pose:
        values = _parse_floats(args.init_pose, 12, "--init-pose")
        init_pose = RigidTransform(np.array(values[:9]).reshape(3, 3), values[9:])
    cfg = MeasureConfig(
        input_path=args.input,
        physical_side=args.side,
        squares_per_side=args.squares,
        crop=crop,
        template_spacing=args.template_spacing,
        ransac_threshold=args.ransac_threshold,
        ransac_iterations=args.ransac_iterations,
        seed=args.seed,
        otsu_bins=args.otsu_bins,
        icp=icp,
        init_pose=init_pose,
        preprocess=not args.no_preprocess,
    )
    report = measure_target(cfg)
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.aligned_out and report.aligned_template is not None:
        write_point_cloud(report.aligned_template, args.aligned_out, args.format)
    return EXIT_OK if report.verified else EXIT_UNVERIFIED


def _cmd_preprocess(args) -> int:
    cloud = read_point_cloud(args.input)
    applied = []
    if args.crop:
        values = _parse_floats(args.crop, 6, "--crop")
        cloud = crop_aabb(cloud, Aabb(values[:3], values[3:]))
        applied.append("crop")
    if args.ransac_threshold is not None:
        cloud = remove_outliers(cloud, args.ransac_threshold, args.ransac_iterations, args.seed)
        applied.append("ransac")
    if args.binarize:
        cloud = stretch_intensity(cloud)
        threshold = otsu_threshold(cloud.intensity, args.otsu_bins)
        cloud = binarize_intensity(cloud, threshold)
        applied.append(f"binarize(threshold={threshold!r})")
    if not applied:
        print("preprocess: nothing to do (pass --crop, --ransac-threshold and/or --binarize)",
              file=sys.stderr)
        return EXIT_USAGE
    write_point_cloud(cloud, args.out, args.format)
    print(f"applied {', '.join(applied)}; wrote {len(cloud)} points to {args.out}")
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage text itself
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    handlers = {
        "synth": _cmd_synth,
        "sweep": _cmd_sweep,
        "measure": _cmd_measure,
        "preprocess": _cmd_preprocess,
    }
    try:
        return handlers[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
