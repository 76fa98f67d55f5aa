import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";

import { completeGrid, CSV_COLUMNS, parseSweepCsv, shiftSlice } from "../src/csv.js";

const golden = readFileSync(new URL("../testdata/golden.csv", import.meta.url), "utf-8");

describe("parseSweepCsv", () => {
  it("loads the golden table with verbatim cells", () => {
    const rows = parseSweepCsv(golden);
    expect(rows.length).toBe(48);
    const lines = golden.trim().split("\n").slice(1);
    rows.forEach((row, i) => {
      expect(CSV_COLUMNS.map((c) => row.raw[c]).join(",")).toBe(lines[i]);
    });
  });

  it("rejects a wrong header", () => {
    expect(() => parseSweepCsv("a,b,c\n1,2,3\n")).toThrow(/unexpected header/);
  });

  it("rejects ragged rows and non-numeric cells", () => {
    const header = CSV_COLUMNS.join(",");
    expect(() => parseSweepCsv(`${header}\ncoloured,0.1\n`)).toThrow(/expected 11 cells/);
    const bad = `${header}\ncoloured,x,0,0,0,5,1,0,0,0,1\n`;
    expect(() => parseSweepCsv(bad)).toThrow(/not numeric/);
  });

  it("parses nan cells as NaN", () => {
    const header = CSV_COLUMNS.join(",");
    const rows = parseSweepCsv(`${header}\ncoloured,1.5,0.0,0.0,0.0,5,0.0,nan,nan,nan,3.0\n`);
    expect(Number.isNaN(rows[0].meanRmse)).toBe(true);
    expect(rows[0].raw.mean_rmse).toBe("nan");
  });
});

describe("shiftSlice", () => {
  it("keeps only rotation-0 noise-0 rows, sorted by shift", () => {
    const slices = shiftSlice(parseSweepCsv(golden));
    expect([...slices.keys()].sort()).toEqual(["coloured", "point-to-plane"]);
    for (const series of slices.values()) {
      expect(series.every((r) => r.inPlaneDeg === 0 && r.noiseSigma === 0)).toBe(true);
      const shifts = series.map((r) => r.shiftFraction);
      expect(shifts).toEqual([...shifts].sort((a, b) => a - b));
    }
  });
});

describe("completeGrid", () => {
  it("collects the full shift x rotation grid", () => {
    const grid = completeGrid(parseSweepCsv(golden), "coloured", 0);
    expect(grid.shifts).toEqual([0, 0.3, 0.6, 0.9, 1.2, 1.5]);
    expect(grid.rotations).toEqual([0, 10, 20, 30]);
    expect(grid.cells.size).toBe(24);
  });

  it("lists missing cells", () => {
    const rows = parseSweepCsv(golden).filter(
      (r) => !(r.shiftFraction === 0.6 && r.inPlaneDeg === 20),
    );
    expect(() => completeGrid(rows, "coloured", 0)).toThrow(
      /missing cells: \(shift=0.6, rotation=20\)/,
    );
  });

  it("reports an absent method", () => {
    expect(() => completeGrid(parseSweepCsv(golden), "magic", 0)).toThrow(/no rows for method/);
  });
});
