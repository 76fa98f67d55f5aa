/**
 * Shift x rotation heatmap for one method and noise level. Cell text is the
 * verbatim CSV value; the colour scale is 0..1 for success_rate and clipped
 * at 0.5 for mean_rmse (display only, the printed value is untouched).
 */

import { completeGrid, gridKey, SweepRow } from "./csv.js";
import { heatColour, SvgBuilder } from "./svg.js";

export type HeatmapMetric = "success_rate" | "mean_rmse";

const CELL_W = 64;
const CELL_H = 40;
const MARGIN = { left: 90, top: 56, right: 130, bottom: 60 };
const RMSE_CLIP = 0.5;

export function renderHeatmap(
  rows: SweepRow[],
  metric: HeatmapMetric,
  method: string,
  noiseSigma = 0,
): string {
  const grid = completeGrid(rows, method, noiseSigma);
  const width = MARGIN.left + CELL_W * grid.shifts.length + MARGIN.right;
  const height = MARGIN.top + CELL_H * grid.rotations.length + MARGIN.bottom;
  const svg = new SvgBuilder(width, height);

  svg.text(MARGIN.left, 20, `${metric} across shifts and rotations`, { size: 14 });
  svg.text(MARGIN.left, 38, `method ${method}, noise_sigma ${noiseSigma}`, {
    size: 11,
    fill: "#555",
  });

  for (let yi = 0; yi < grid.rotations.length; yi++) {
    for (let xi = 0; xi < grid.shifts.length; xi++) {
      const row = grid.cells.get(gridKey(grid.shifts[xi], grid.rotations[yi]))!;
      const value = metric === "success_rate" ? row.successRate : row.meanRmse;
      const scaled = metric === "success_rate" ? value : Math.min(value, RMSE_CLIP) / RMSE_CLIP;
      const x0 = MARGIN.left + xi * CELL_W;
      const y0 = MARGIN.top + yi * CELL_H;
      svg.rect(x0, y0, CELL_W, CELL_H, heatColour(scaled), "#ffffff");
      const text = metric === "success_rate" ? row.raw.success_rate : row.raw.mean_rmse;
      // the verbatim value is never truncated; long floats just render small
      svg.text(x0 + CELL_W / 2, y0 + CELL_H / 2 + 3, text, {
        size: text.length <= 10 ? 9 : 4,
        anchor: "middle",
        cls: "stat",
        fill: "#111",
      });
    }
  }

  // axes: verbatim coordinates from the table
  for (let xi = 0; xi < grid.shifts.length; xi++) {
    const row = grid.cells.get(gridKey(grid.shifts[xi], grid.rotations[0]))!;
    svg.text(MARGIN.left + xi * CELL_W + CELL_W / 2, MARGIN.top + CELL_H * grid.rotations.length + 16,
      row.raw.shift_fraction, { size: 10, anchor: "middle", cls: "tick" });
  }
  for (let yi = 0; yi < grid.rotations.length; yi++) {
    const row = grid.cells.get(gridKey(grid.shifts[0], grid.rotations[yi]))!;
    svg.text(MARGIN.left - 8, MARGIN.top + yi * CELL_H + CELL_H / 2 + 3, row.raw.in_plane_deg, {
      size: 10,
      anchor: "end",
      cls: "tick",
    });
  }
  svg.text(MARGIN.left + (CELL_W * grid.shifts.length) / 2,
    MARGIN.top + CELL_H * grid.rotations.length + 40,
    "shift (fraction of side)", { size: 11, anchor: "middle" });
  svg.text(22, MARGIN.top + (CELL_H * grid.rotations.length) / 2,
    "rotation (degrees, in-plane = out-of-plane)", { size: 11, anchor: "middle", rotate: -90 });

  // colourbar
  const barX = MARGIN.left + CELL_W * grid.shifts.length + 24;
  const barH = CELL_H * grid.rotations.length;
  const steps = 24;
  for (let i = 0; i < steps; i++) {
    const t = 1 - i / (steps - 1);
    svg.rect(barX, MARGIN.top + (i * barH) / steps, 16, barH / steps + 0.5, heatColour(t));
  }
  const barLabel = metric === "success_rate" ? "success_rate (0 to 1)" : `mean_rmse (clipped at ${RMSE_CLIP})`;
  svg.text(barX + 8, MARGIN.top + barH + 16, barLabel, { size: 9, anchor: "middle" });
  return svg.render();
}
