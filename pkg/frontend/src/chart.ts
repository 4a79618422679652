/**
 * Deterministic SVG line charts: one polyline per series through the
 * per-sweep-value means with standard-error bars. No clock, no randomness;
 * identical input yields identical bytes.
 */
import type { Series } from "./csv.js";

export interface ChartOptions {
  xLabel: string;
  yLabel?: string;
  title?: string;
  width?: number;
  height?: number;
}

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f",
];
const MARKERS_EVERY = 1;

function fmt(value: number): string {
  // fixed-precision coordinates keep the output byte-stable
  return value.toFixed(2).replace(/^-0\.00$/, "0.00");
}

function fmtTick(value: number): string {
  const text = value.toPrecision(6);
  return text.includes(".") ? text.replace(/\.?0+$/, "") : text;
}

/** Round tick positions covering [min, max] with a 1/2/5 step. */
export function niceTicks(min: number, max: number, count = 6): number[] {
  if (min === max) {
    const pad = min === 0 ? 1 : Math.abs(min) * 0.1;
    min -= pad;
    max += pad;
  }
  const rawStep = (max - min) / Math.max(count - 1, 1);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[3];
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[]): Extent {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    const pad = min === 0 ? 1 : Math.abs(min) * 0.1;
    min -= pad;
    max += pad;
  }
  return { min, max };
}

export function renderChart(series: Series[], options: ChartOptions): string {
  if (series.length === 0) {
    throw new Error("nothing to plot: no series");
  }
  const width = options.width ?? 720;
  const height = options.height ?? 480;
  const margin = { left: 72, right: 150, top: 36, bottom: 56 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.flatMap((p) => [p.mean - p.se, p.mean + p.se]));
  const xExt = extent(xs);
  const yExt = extent(ys);
  const xTicks = niceTicks(xExt.min, xExt.max);
  const yTicks = niceTicks(yExt.min, yExt.max);
  // include tick extremes so polylines stay inside the frame
  const xLo = Math.min(xExt.min, xTicks[0]);
  const xHi = Math.max(xExt.max, xTicks[xTicks.length - 1]);
  const yLo = Math.min(yExt.min, yTicks[0]);
  const yHi = Math.max(yExt.max, yTicks[yTicks.length - 1]);

  const sx = (x: number) => margin.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => margin.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);

  // grid and axes
  for (const t of yTicks) {
    const y = fmt(sy(t));
    parts.push(
      `<line x1="${fmt(margin.left)}" y1="${y}" x2="${fmt(margin.left + plotW)}" ` +
      `y2="${y}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(margin.left - 8)}" y="${y}" text-anchor="end" ` +
      `dominant-baseline="middle" font-size="12" fill="#333333">${fmtTick(t)}</text>`,
    );
  }
  for (const t of xTicks) {
    const x = fmt(sx(t));
    parts.push(
      `<line x1="${x}" y1="${fmt(margin.top + plotH)}" x2="${x}" ` +
      `y2="${fmt(margin.top + plotH + 5)}" stroke="#333333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x}" y="${fmt(margin.top + plotH + 20)}" text-anchor="middle" ` +
      `font-size="12" fill="#333333">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${fmt(margin.left)}" y="${fmt(margin.top)}" width="${fmt(plotW)}" ` +
    `height="${fmt(plotH)}" fill="none" stroke="#333333" stroke-width="1"/>`,
  );

  // axis labels and optional title
  parts.push(
    `<text x="${fmt(margin.left + plotW / 2)}" y="${fmt(height - 14)}" ` +
    `text-anchor="middle" font-size="14" fill="#000000">${options.xLabel}</text>`,
  );
  const yLabel = options.yLabel ?? "capacity (bits/s/Hz)";
  parts.push(
    `<text x="18" y="${fmt(margin.top + plotH / 2)}" text-anchor="middle" ` +
    `font-size="14" fill="#000000" transform="rotate(-90 18 ` +
    `${fmt(margin.top + plotH / 2)})">${yLabel}</text>`,
  );
  if (options.title) {
    parts.push(
      `<text x="${fmt(margin.left + plotW / 2)}" y="22" text-anchor="middle" ` +
      `font-size="15" fill="#000000">${options.title}</text>`,
    );
  }

  // series: error bars under the polyline, then markers
  series.forEach((s, index) => {
    const color = PALETTE[index % PALETTE.length];
    for (const p of s.points) {
      if (p.se > 0) {
        const x = fmt(sx(p.x));
        const yLo2 = fmt(sy(p.mean - p.se));
        const yHi2 = fmt(sy(p.mean + p.se));
        parts.push(
          `<line x1="${x}" y1="${yLo2}" x2="${x}" y2="${yHi2}" ` +
          `stroke="${color}" stroke-width="1"/>`,
        );
        for (const yCap of [yLo2, yHi2]) {
          parts.push(
            `<line x1="${fmt(sx(p.x) - 4)}" y1="${yCap}" x2="${fmt(sx(p.x) + 4)}" ` +
            `y2="${yCap}" stroke="${color}" stroke-width="1"/>`,
          );
        }
      }
    }
    const path = s.points
      .map((p) => `${fmt(sx(p.x))},${fmt(sy(p.mean))}`)
      .join(" ");
    parts.push(
      `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="2"/>`,
    );
    s.points.forEach((p, i) => {
      if (i % MARKERS_EVERY === 0) {
        parts.push(
          `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.mean))}" r="3" ` +
          `fill="${color}"/>`,
        );
      }
    });
  });

  // legend
  series.forEach((s, index) => {
    const color = PALETTE[index % PALETTE.length];
    const y = margin.top + 10 + index * 20;
    const x = margin.left + plotW + 16;
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(y)}" x2="${fmt(x + 22)}" y2="${fmt(y)}" ` +
      `stroke="${color}" stroke-width="2"/>`,
    );
    parts.push(`<circle cx="${fmt(x + 11)}" cy="${fmt(y)}" r="3" fill="${color}"/>`);
    parts.push(
      `<text x="${fmt(x + 28)}" y="${fmt(y)}" dominant-baseline="middle" ` +
      `font-size="13" fill="#000000">${s.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
