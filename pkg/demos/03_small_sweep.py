"""Run a reduced shift sweep (both solvers, 20 trials per cell) and print the
success-rate curves; the full 100-trial protocol lives in the acceptance
suite and the CLI.

Writes sweep_demo.csv next to this script in the documented CSV schema.
"""

import time
from pathlib import Path

from checkercentre import CheckerboardSpec, run_sweep, write_results
from checkercentre.harness import METHOD_COLOURED, METHOD_POINT_TO_PLANE, SweepConfig

here = Path(__file__).resolve().parent

cfg = SweepConfig(
    spec=CheckerboardSpec(),
    shift_fractions=[round(0.1 * i, 1) for i in range(16)],
    trials_per_cell=20,
    base_seed=0,
    methods=(METHOD_COLOURED, METHOD_POINT_TO_PLANE),
)

start = time.perf_counter()
table = run_sweep(cfg, workers=2)
print(f"swept {len(table)} cells x {cfg.trials_per_cell} trials "
      f"in {time.perf_counter() - start:.1f} s\n")

print("shift   coloured  point-to-plane")
rates = {(row.method, row.shift_fraction): row.success_rate for row in table}
for shift in cfg.shift_fractions:
    c = rates[(METHOD_COLOURED, shift)]
    p = rates[(METHOD_POINT_TO_PLANE, shift)]
    bar = "#" * int(round(20 * c))
    print(f" {shift:4.1f}   {c:8.2f}  {p:14.2f}   {bar}")

out = here / "sweep_demo.csv"
write_results(table, out)
print(f"\nwrote {out}")
