export { CSV_COLUMNS, completeGrid, parseSweepCsv, shiftSlice } from "./csv.js";
export type { ColumnName, Grid, SweepRow } from "./csv.js";
export { renderHeatmap } from "./heatmap.js";
export type { HeatmapMetric } from "./heatmap.js";
export { renderShiftLines } from "./lines.js";
export { main } from "./cli.js";
