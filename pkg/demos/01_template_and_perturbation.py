"""Generate the synthetic checkerboard template and look at what a seeded
pose perturbation does to it.

Writes template.ply and perturbed.ply next to this script so the pair can be
inspected in any point-cloud viewer.
"""

from pathlib import Path

import numpy as np

from checkercentre import (
    CheckerboardSpec,
    Perturbation,
    apply_transform,
    generate_checkerboard,
    perturbation_to_transform,
    write_point_cloud,
)

here = Path(__file__).resolve().parent

spec = CheckerboardSpec(squares_per_side=2, square_size=0.1, point_spacing=0.01)
template = generate_checkerboard(spec)
print(f"template: {len(template)} points over {spec.side_length:.2f} m, "
      f"{int(template.intensity.sum())} white / {int((1 - template.intensity).sum())} black")

pert = Perturbation(
    shift_fraction=0.6,
    shift_direction=(np.cos(0.7), np.sin(0.7)),
    in_plane_deg=15.0,
    out_plane_deg=10.0,
    seed=42,
)
pose = perturbation_to_transform(pert, spec)
moved = apply_transform(template, pose)

print("perturbation pose:")
print(np.array_str(pose.matrix(), precision=4, suppress_small=True))
print(f"template centre moved to {np.round(pose.apply(np.zeros(3)), 4)} "
      f"({pert.shift_fraction:.0%} of the side length away)")

write_point_cloud(template, here / "template.ply", "ply-binary")
write_point_cloud(moved, here / "perturbed.ply", "ply-binary")
print(f"wrote {here / 'template.ply'} and {here / 'perturbed.ply'}")
