/**
 * Strict parsing and aggregation for the benchmark CLI's CSV contract.
 *
 * Two layouts are accepted: raw per-trial rows (capacity_bps_hz) and the
 * summary layout (capacity_mean_bps_hz / capacity_se_bps_hz). Fields never
 * contain commas or quotes, so plain splitting is exact.
 */

export interface SeriesPoint {
  x: number;
  mean: number;
  se: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export interface ParsedCsv {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): ParsedCsv {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("input CSV is empty");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`row ${i + 1} has ${cells.length} cells, expected ${header.length}`);
    }
    return cells;
  });
  if (rows.length === 0) {
    throw new Error("input CSV has a header but no data rows");
  }
  return { header, rows };
}

function columnIndex(header: string[], name: string): number {
  const idx = header.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column: ${name}`);
  }
  return idx;
}

function toNumber(cell: string, column: string): number {
  const value = Number(cell);
  if (!Number.isFinite(value)) {
    throw new Error(`column ${column} holds non-numeric value: ${cell}`);
  }
  return value;
}

/** Group rows into one series per label, points sorted by ascending x. */
export function extractSeries(
  text: string,
  xColumn: string,
  groupColumn = "scheme",
): Series[] {
  const { header, rows } = parseCsv(text);
  const xIdx = columnIndex(header, xColumn);
  const groupIdx = columnIndex(header, groupColumn);

  const isSummary = header.includes("capacity_mean_bps_hz");
  const byLabel = new Map<string, Map<number, { mean: number; se: number }>>();

  if (isSummary) {
    const meanIdx = columnIndex(header, "capacity_mean_bps_hz");
    const seIdx = columnIndex(header, "capacity_se_bps_hz");
    for (const row of rows) {
      const label = row[groupIdx];
      const x = toNumber(row[xIdx], xColumn);
      if (!byLabel.has(label)) byLabel.set(label, new Map());
      byLabel.get(label)!.set(x, {
        mean: toNumber(row[meanIdx], "capacity_mean_bps_hz"),
        se: toNumber(row[seIdx], "capacity_se_bps_hz"),
      });
    }
  } else {
    const capIdx = columnIndex(header, "capacity_bps_hz");
    const samples = new Map<string, Map<number, number[]>>();
    for (const row of rows) {
      const label = row[groupIdx];
      const x = toNumber(row[xIdx], xColumn);
      if (!samples.has(label)) samples.set(label, new Map());
      const perX = samples.get(label)!;
      if (!perX.has(x)) perX.set(x, []);
      perX.get(x)!.push(toNumber(row[capIdx], "capacity_bps_hz"));
    }
    for (const [label, perX] of samples) {
      const out = new Map<number, { mean: number; se: number }>();
      for (const [x, values] of perX) {
        const mean = values.reduce((a, b) => a + b, 0) / values.length;
        let se = 0;
        if (values.length > 1) {
          const varSum = values.reduce((a, b) => a + (b - mean) ** 2, 0);
          se = Math.sqrt(varSum / (values.length - 1)) / Math.sqrt(values.length);
        }
        out.set(x, { mean, se });
      }
      byLabel.set(label, out);
    }
  }

  const labels = [...byLabel.keys()].sort();
  return labels.map((label) => {
    const perX = byLabel.get(label)!;
    const xs = [...perX.keys()].sort((a, b) => a - b);
    return {
      label,
      points: xs.map((x) => ({ x, mean: perX.get(x)!.mean, se: perX.get(x)!.se })),
    };
  });
}
