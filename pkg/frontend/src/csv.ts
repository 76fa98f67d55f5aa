/**
 * Sweep-table CSV: parsing and validation.
 *
 * The schema is fixed:
 *   method,shift_fraction,in_plane_deg,out_plane_deg,noise_sigma,trials,
 *   success_rate,mean_rmse,std_rmse,mean_centre_error,mean_iterations
 *
 * Every numeric cell is kept both parsed and as its verbatim CSV text, so a
 * figure can display exactly the bytes the harness wrote (no re-formatting,
 * no recomputation).
 */

export const CSV_COLUMNS = [
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
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface SweepRow {
  method: string;
  shiftFraction: number;
  inPlaneDeg: number;
  outPlaneDeg: number;
  noiseSigma: number;
  trials: number;
  successRate: number;
  meanRmse: number;
  stdRmse: number;
  meanCentreError: number;
  meanIterations: number;
  /** Verbatim cell text per column, exactly as written in the file. */
  raw: Record<ColumnName, string>;
}

function parseNumber(text: string, column: string, line: number): number {
  if (text === "nan") return NaN;
  if (text === "inf") return Infinity;
  if (text === "-inf") return -Infinity;
  const value = Number(text);
  if (text.trim() === "" || Number.isNaN(value)) {
    throw new Error(`line ${line}: column ${column} is not numeric: ${JSON.stringify(text)}`);
  }
  return value;
}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) throw new Error("empty CSV");
  const header = lines[0].split(",");
  if (header.length !== CSV_COLUMNS.length || !header.every((h, i) => h === CSV_COLUMNS[i])) {
    throw new Error(`unexpected header: ${lines[0]} (want ${CSV_COLUMNS.join(",")})`);
  }
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== CSV_COLUMNS.length) {
      throw new Error(`line ${i + 1}: expected ${CSV_COLUMNS.length} cells, found ${cells.length}`);
    }
    const raw = Object.fromEntries(CSV_COLUMNS.map((c, j) => [c, cells[j]])) as Record<
      ColumnName,
      string
    >;
    rows.push({
      method: raw.method,
      shiftFraction: parseNumber(raw.shift_fraction, "shift_fraction", i + 1),
      inPlaneDeg: parseNumber(raw.in_plane_deg, "in_plane_deg", i + 1),
      outPlaneDeg: parseNumber(raw.out_plane_deg, "out_plane_deg", i + 1),
      noiseSigma: parseNumber(raw.noise_sigma, "noise_sigma", i + 1),
      trials: parseNumber(raw.trials, "trials", i + 1),
      successRate: parseNumber(raw.success_rate, "success_rate", i + 1),
      meanRmse: parseNumber(raw.mean_rmse, "mean_rmse", i + 1),
      stdRmse: parseNumber(raw.std_rmse, "std_rmse", i + 1),
      meanCentreError: parseNumber(raw.mean_centre_error, "mean_centre_error", i + 1),
      meanIterations: parseNumber(raw.mean_iterations, "mean_iterations", i + 1),
      raw,
    });
  }
  return rows;
}

/** Rows at rotation 0 and noise 0, keyed by method, sorted by shift. */
export function shiftSlice(rows: SweepRow[]): Map<string, SweepRow[]> {
  const byMethod = new Map<string, SweepRow[]>();
  for (const row of rows) {
    if (row.inPlaneDeg === 0 && row.outPlaneDeg === 0 && row.noiseSigma === 0) {
      const list = byMethod.get(row.method) ?? [];
      list.push(row);
      byMethod.set(row.method, list);
    }
  }
  for (const list of byMethod.values()) {
    list.sort((a, b) => a.shiftFraction - b.shiftFraction);
  }
  return byMethod;
}

export interface Grid {
  method: string;
  noiseSigma: number;
  shifts: number[];
  rotations: number[];
  /** cell lookup by "shift|rotation" key */
  cells: Map<string, SweepRow>;
}

export function gridKey(shift: number, rotation: number): string {
  return `${shift}|${rotation}`;
}

/**
 * Collect the complete shift x rotation grid for one method at one noise
 * level; throws listing every missing cell when the grid has holes.
 */
export function completeGrid(rows: SweepRow[], method: string, noiseSigma: number): Grid {
  const selected = rows.filter((r) => r.method === method && r.noiseSigma === noiseSigma);
  if (selected.length === 0) {
    throw new Error(`no rows for method ${JSON.stringify(method)} at noise_sigma ${noiseSigma}`);
  }
  const shifts = [...new Set(selected.map((r) => r.shiftFraction))].sort((a, b) => a - b);
  const rotations = [...new Set(selected.map((r) => r.inPlaneDeg))].sort((a, b) => a - b);
  const cells = new Map<string, SweepRow>();
  for (const row of selected) {
    cells.set(gridKey(row.shiftFraction, row.inPlaneDeg), row);
  }
  const missing: string[] = [];
  for (const s of shifts) {
    for (const r of rotations) {
      if (!cells.has(gridKey(s, r))) missing.push(`(shift=${s}, rotation=${r})`);
    }
  }
  if (missing.length > 0) {
    throw new Error(`incomplete shift x rotation grid, missing cells: ${missing.join(", ")}`);
  }
  return { method, noiseSigma, shifts, rotations, cells };
}
