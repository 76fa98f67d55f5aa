import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";

import { CSV_COLUMNS, parseSweepCsv } from "../src/csv.js";
import { renderHeatmap } from "../src/heatmap.js";
import { renderShiftLines } from "../src/lines.js";

const goldenText = readFileSync(new URL("../testdata/golden.csv", import.meta.url), "utf-8");
const golden = parseSweepCsv(goldenText);

const header = CSV_COLUMNS.join(",");

function textNodes(svg: string, cls: string): string[] {
  const out: string[] = [];
  const pattern = new RegExp(`<text[^>]*class="${cls}"[^>]*>([^<]*)</text>`, "g");
  for (const match of svg.matchAll(pattern)) out.push(match[1]);
  return out;
}

describe("renderShiftLines", () => {
  it("renders one legend entry and one line per method", () => {
    const svg = renderShiftLines(golden);
    const legends = textNodes(svg, "legend");
    expect(legends.sort()).toEqual(["coloured", "point-to-plane"]);
    expect((svg.match(/<polyline/g) ?? []).length).toBeGreaterThanOrEqual(3);
  });

  it("renders a single-cell table as a single-point plot", () => {
    const one = parseSweepCsv(`${header}\ncoloured,0.0,0.0,0.0,0.0,5,1.0,0.0,0.0,0.0,1.0\n`);
    const svg = renderShiftLines(one);
    expect(svg).toContain("<circle");
    expect(svg).not.toContain("<polyline");
  });

  it("errors when the rotation-0 noise-0 slice is absent", () => {
    const rotated = golden.filter((r) => r.inPlaneDeg !== 0);
    expect(() => renderShiftLines(rotated)).toThrow(/missing slice/);
  });

  it("is byte-deterministic", () => {
    expect(renderShiftLines(golden)).toBe(renderShiftLines(golden));
  });
});

describe("renderHeatmap", () => {
  it("renders a 1x1 grid", () => {
    const one = parseSweepCsv(`${header}\ncoloured,0.0,0.0,0.0,0.0,5,1.0,0.0,0.0,0.0,1.0\n`);
    const svg = renderHeatmap(one, "success_rate", "coloured", 0);
    expect(textNodes(svg, "stat")).toEqual(["1.0"]);
  });

  it("gives a constant table a uniform colour", () => {
    const rows = parseSweepCsv(
      [
        header,
        "coloured,0.0,0.0,0.0,0.0,5,0.5,0.1,0.0,0.0,1.0",
        "coloured,0.5,0.0,0.0,0.0,5,0.5,0.1,0.0,0.0,1.0",
        "coloured,0.0,10.0,10.0,0.0,5,0.5,0.1,0.0,0.0,1.0",
        "coloured,0.5,10.0,10.0,0.0,5,0.5,0.1,0.0,0.0,1.0",
      ].join("\n") + "\n",
    );
    const svg = renderHeatmap(rows, "success_rate", "coloured", 0);
    const fills = [...svg.matchAll(/<rect[^>]*fill="(rgb[^"]*)"[^>]*stroke="#ffffff"/g)].map(
      (m) => m[1],
    );
    expect(fills.length).toBe(4);
    expect(new Set(fills).size).toBe(1);
  });

  it("errors on an incomplete grid, naming the holes", () => {
    const rows = golden.filter((r) => !(r.shiftFraction === 0.9 && r.inPlaneDeg === 30));
    expect(() => renderHeatmap(rows, "success_rate", "coloured", 0)).toThrow(/shift=0.9/);
  });

  it("renders the verbatim cell values for both metrics", () => {
    for (const metric of ["success_rate", "mean_rmse"] as const) {
      const svg = renderHeatmap(golden, metric, "coloured", 0);
      const values = textNodes(svg, "stat");
      expect(values.length).toBe(24);
      const expected = golden
        .filter((r) => r.method === "coloured" && r.noiseSigma === 0)
        .map((r) => r.raw[metric]);
      expect(values.sort()).toEqual(expected.sort());
    }
  });
});
