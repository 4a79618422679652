#!/usr/bin/env node
/**
 * sweep-plot: SVG line charts from rismimo sweep CSVs (raw or summary).
 *
 * Usage:
 *   sweep-plot --input results/fig3a_summary.csv --x sweep_value --output fig3a.svg
 *   sweep-plot --input results/fig4a.csv --x sweep_value --x-label "p_d (dBm)" --output fig4a.svg
 */
import { render } from "./plot.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument: ${arg}`);
    }
    const eq = arg.indexOf("=");
    if (eq >= 0) {
      out.set(arg.slice(2, eq), arg.slice(eq + 1));
    } else {
      const value = argv[i + 1];
      if (value === undefined || value.startsWith("--")) {
        throw new Error(`missing value for ${arg}`);
      }
      out.set(arg.slice(2), value);
      i += 1;
    }
  }
  return out;
}

function main(): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  const input = args.get("input");
  const output = args.get("output");
  if (!input || !output) {
    console.error(
      "usage: sweep-plot --input <csv> --output <svg> [--x <column>] " +
      "[--group-by <column>] [--x-label <text>] [--y-label <text>] [--title <text>]",
    );
    return 2;
  }
  try {
    render({
      inputPath: input,
      outputPath: output,
      xColumn: args.get("x") ?? "sweep_value",
      groupColumn: args.get("group-by") ?? "scheme",
      xLabel: args.get("x-label"),
      yLabel: args.get("y-label"),
      title: args.get("title"),
    });
  } catch (err) {
    console.error(`plot failed: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${output}`);
  return 0;
}

process.exit(main());
