"""Optional integration check against real survey-grade scans.

Point CHECKERCENTRE_DATASET at a directory containing a ``manifest.csv``
with the columns

    path,side,cx,cy,cz[,minx,miny,minz,maxx,maxy,maxz]

where ``path`` is a scan (PLY or XYZI, relative to the manifest), ``side``
the physical side length in metres, (cx, cy, cz) the reference centre and
the optional last six columns a crop box. The mean centre disagreement over
all listed targets must stay within 2 mm.
"""

import csv
import os
from pathlib import Path

import numpy as np
import pytest

from checkercentre import Aabb, MeasureConfig, measure_target

DATASET = os.environ.get("CHECKERCENTRE_DATASET", "")


@pytest.mark.skipif(not DATASET, reason="set CHECKERCENTRE_DATASET to run the real-data check")
def test_reference_centres_within_two_millimetres():
    root = Path(DATASET)
    manifest = root / "manifest.csv"
    assert manifest.exists(), f"no manifest.csv under {root}"
    errors = []
    with open(manifest, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            crop = None
            if row.get("minx"):
                crop = Aabb(
                    [float(row["minx"]), float(row["miny"]), float(row["minz"])],
                    [float(row["maxx"]), float(row["maxy"]), float(row["maxz"])],
                )
            report = measure_target(
                MeasureConfig(
                    input_path=root / row["path"],
                    physical_side=float(row["side"]),
                    crop=crop,
                )
            )
            reference = np.array([float(row["cx"]), float(row["cy"]), float(row["cz"])])
            errors.append(float(np.linalg.norm(report.centre - reference)))
    assert errors, "manifest listed no targets"
    mean_error = float(np.mean(errors))
    print(f"\nreal-data mean centre error: {mean_error * 1000:.2f} mm over {len(errors)} targets")
    assert mean_error <= 0.002
