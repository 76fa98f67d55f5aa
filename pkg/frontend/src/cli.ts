#!/usr/bin/env node
/**
 * Figure CLI:
 *   checkercentre-plot lines   --in results.csv --out fig.svg
 *   checkercentre-plot heatmap --in results.csv --metric success_rate|mean_rmse \
 *                              --out fig.svg [--method coloured] [--noise 0]
 *
 * Exit codes: 0 ok, 1 runtime error (bad table, missing cells), 2 usage.
 */

import { readFileSync, writeFileSync } from "fs";
import { parseSweepCsv } from "./csv.js";
import { HeatmapMetric, renderHeatmap } from "./heatmap.js";
import { renderShiftLines } from "./lines.js";

const USAGE = `usage:
  checkercentre-plot lines   --in results.csv --out fig.svg
  checkercentre-plot heatmap --in results.csv --metric success_rate|mean_rmse --out fig.svg [--method NAME] [--noise SIGMA]`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new UsageError(`bad flag ${JSON.stringify(key)}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

class UsageError extends Error {}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new UsageError(`missing --${name}`);
  return value;
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command !== "lines" && command !== "heatmap") {
      throw new UsageError(`unknown command ${JSON.stringify(command ?? "")}`);
    }
    const flags = parseFlags(rest);
    const rows = parseSweepCsv(readFileSync(need(flags, "in"), "utf-8"));
    let svg: string;
    if (command === "lines") {
      svg = renderShiftLines(rows);
    } else {
      const metric = need(flags, "metric");
      if (metric !== "success_rate" && metric !== "mean_rmse") {
        throw new UsageError(`--metric must be success_rate or mean_rmse, got ${metric}`);
      }
      const methods = [...new Set(rows.map((r) => r.method))].sort();
      const method = flags.get("method") ?? (methods.includes("coloured") ? "coloured" : methods[0]);
      const noise = Number(flags.get("noise") ?? "0");
      svg = renderHeatmap(rows, metric as HeatmapMetric, method, noise);
    }
    writeFileSync(need(flags, "out"), svg);
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}\n${USAGE}`);
      return 2;
    }
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
