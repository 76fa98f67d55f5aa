/**
 * Shift-sweep line figure: one line per method over the rotation-0, noise-0
 * slice. Top panel is the success rate, bottom panel the mean RMSE of
 * successful trials with the standard deviation printed next to each point.
 *
 * Every number shown is a verbatim CSV cell (class "stat" for statistics,
 * "tick" for axis coordinates); nothing is recomputed or re-formatted.
 */

import { shiftSlice, SweepRow } from "./csv.js";
import { linearScale, methodColour, SvgBuilder } from "./svg.js";

const WIDTH = 860;
const PANEL_HEIGHT = 280;
const MARGIN = { left: 70, right: 30, top: 40, bottom: 45 };

export function renderShiftLines(rows: SweepRow[]): string {
  const byMethod = shiftSlice(rows);
  if (byMethod.size === 0) {
    throw new Error(
      "missing slice: no rows with in_plane_deg=0, out_plane_deg=0, noise_sigma=0",
    );
  }
  const methods = [...byMethod.keys()].sort();
  const shifts = [...new Set([...byMethod.values()].flat().map((r) => r.shiftFraction))].sort(
    (a, b) => a - b,
  );

  const height = 2 * PANEL_HEIGHT + 30;
  const svg = new SvgBuilder(WIDTH, height);
  const x = linearScale(
    shifts[0],
    shifts[shifts.length - 1],
    MARGIN.left,
    WIDTH - MARGIN.right,
  );

  drawPanel(svg, byMethod, methods, shifts, x, {
    top: MARGIN.top,
    title: "success rate vs shift (rotation 0, noise 0)",
    yLabel: "success rate (0 to 1)",
    value: (r) => r.successRate,
    label: (r) => r.raw.success_rate,
    yMax: 1,
  });
  drawPanel(svg, byMethod, methods, shifts, x, {
    top: PANEL_HEIGHT + 40,
    title: "mean RMSE of successful trials (fraction of side), std next to each point",
    yLabel: "mean RMSE",
    value: (r) => r.meanRmse,
    label: (r) => (Number.isNaN(r.meanRmse) ? "" : r.raw.std_rmse),
    yMax: maxFinite([...byMethod.values()].flat().map((r) => r.meanRmse), 1e-6),
  });

  // legend, one entry per method
  methods.forEach((method, i) => {
    const lx = MARGIN.left + 10 + i * 220;
    svg.rect(lx, 8, 14, 14, methodColour(method, i));
    svg.text(lx + 20, 19, method, { size: 12, cls: "legend" });
  });
  return svg.render();
}

interface PanelSpec {
  top: number;
  title: string;
  yLabel: string;
  value: (row: SweepRow) => number;
  label: (row: SweepRow) => string;
  yMax: number;
}

function drawPanel(
  svg: SvgBuilder,
  byMethod: Map<string, SweepRow[]>,
  methods: string[],
  shifts: number[],
  x: (v: number) => number,
  spec: PanelSpec,
): void {
  const top = spec.top;
  const bottom = top + PANEL_HEIGHT - MARGIN.bottom;
  const y = linearScale(0, spec.yMax, bottom, top + 18);

  svg.text(MARGIN.left, top + 4, spec.title, { size: 12, fill: "#444" });
  svg.line(MARGIN.left, bottom, WIDTH - MARGIN.right, bottom, "#222");
  svg.line(MARGIN.left, bottom, MARGIN.left, top + 18, "#222");
  svg.text(18, (top + 18 + bottom) / 2, spec.yLabel, { size: 11, anchor: "middle", rotate: -90 });
  svg.text((MARGIN.left + WIDTH - MARGIN.right) / 2, bottom + 34, "shift (fraction of side)", {
    size: 11,
    anchor: "middle",
  });

  for (const shift of shifts) {
    svg.line(x(shift), bottom, x(shift), bottom + 4, "#222");
    // tick labels reuse the verbatim cell text for the shift coordinate
    const anyRow = [...byMethod.values()]
      .flat()
      .find((r) => r.shiftFraction === shift);
    svg.text(x(shift), bottom + 16, anyRow ? anyRow.raw.shift_fraction : "", {
      size: 9,
      anchor: "middle",
      cls: "tick",
    });
  }

  methods.forEach((method, i) => {
    const series = byMethod.get(method) ?? [];
    const colour = methodColour(method, i);
    const pts: Array<[number, number]> = [];
    for (const row of series) {
      const v = spec.value(row);
      if (!Number.isNaN(v)) pts.push([x(row.shiftFraction), y(v)]);
    }
    if (pts.length > 1) svg.polyline(pts, colour);
    for (const row of series) {
      const v = spec.value(row);
      if (Number.isNaN(v)) continue;
      svg.circle(x(row.shiftFraction), y(v), 3, colour);
      const label = spec.label(row);
      if (label) {
        svg.text(x(row.shiftFraction) + 5, y(v) - 5 - 10 * i, label, {
          size: 8,
          cls: "stat",
          fill: colour,
        });
      }
    }
  });
}

function maxFinite(values: number[], floor: number): number {
  let best = floor;
  for (const v of values) {
    if (Number.isFinite(v) && v > best) best = v;
  }
  return best;
}
