/** File-level entry: read a sweep CSV, render the SVG chart, write it out. */
import { readFileSync, writeFileSync } from "node:fs";

import { renderChart } from "./chart.js";
import { extractSeries } from "./csv.js";

export interface PlotSpec {
  inputPath: string;
  xColumn: string;
  outputPath: string;
  groupColumn?: string;
  xLabel?: string;
  yLabel?: string;
  title?: string;
}

/** Render one chart; pure in the CSV bytes and spec, so reruns are identical. */
export function render(spec: PlotSpec): string {
  const text = readFileSync(spec.inputPath, "utf8");
  const series = extractSeries(text, spec.xColumn, spec.groupColumn ?? "scheme");
  const svg = renderChart(series, {
    xLabel: spec.xLabel ?? spec.xColumn,
    yLabel: spec.yLabel,
    title: spec.title,
  });
  writeFileSync(spec.outputPath, svg, "utf8");
  return svg;
}
