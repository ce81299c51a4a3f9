/**
 * Parsers for the bench CSV artifacts.
 *
 * The time-series schema is fixed (t, V, W_g, min_dist, active_index,
 * n_effective); the positions file carries one column per original agent
 * plus the controlled-agent column.  Clustered entropy values arrive as
 * the literal "-inf" and parse to -Infinity.
 */

export class SchemaError extends Error {}

export const SERIES_HEADER = ["t", "V", "W_g", "min_dist", "active_index", "n_effective"];

export interface SeriesData {
  t: number[];
  V: number[];
  W_g: number[];
  min_dist: number[];
  active_index: number[];
  n_effective: number[];
}

export interface PositionsData {
  t: number[];
  /** positions[agent][row] — 1-d runs only */
  positions: number[][];
  active: number[];
  agents: number;
}

export interface GridRow {
  axis: string;
  value: number;
  outcome: string;
  clustering_time: number | null;
  final_V: number;
  final_Wg: number;
  min_dist_min: number;
}

export function parseNumber(token: string): number {
  if (token === "-inf") return -Infinity;
  if (token === "inf") return Infinity;
  if (token === "" || token === "nan") return NaN;
  const value = Number(token);
  if (Number.isNaN(value)) {
    throw new SchemaError(`not a number: ${JSON.stringify(token)}`);
  }
  return value;
}

function splitRows(text: string, what: string): { header: string[]; rows: string[][] } {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${what}: empty file`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new SchemaError(`${what}: 0 data rows (header only)`);
  }
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `${what}: row has ${row.length} fields, header has ${header.length}`
      );
    }
  }
  return { header, rows };
}

export function parseSeriesCsv(text: string): SeriesData {
  const { header, rows } = splitRows(text, "series.csv");
  if (header.join(",") !== SERIES_HEADER.join(",")) {
    throw new SchemaError(
      `series.csv: expected header ${SERIES_HEADER.join(",")}, got ${header.join(",")}`
    );
  }
  const out: SeriesData = { t: [], V: [], W_g: [], min_dist: [], active_index: [], n_effective: [] };
  for (const row of rows) {
    out.t.push(parseNumber(row[0]));
    out.V.push(parseNumber(row[1]));
    out.W_g.push(parseNumber(row[2]));
    out.min_dist.push(parseNumber(row[3]));
    out.active_index.push(parseNumber(row[4]));
    out.n_effective.push(parseNumber(row[5]));
  }
  return out;
}

export function parsePositionsCsv(text: string): PositionsData {
  const { header, rows } = splitRows(text, "positions.csv");
  if (header[0] !== "t" || header[header.length - 1] !== "active_agent") {
    throw new SchemaError("positions.csv: header must be t, x0..x{N-1}, active_agent");
  }
  const agentCols = header.slice(1, -1);
  if (agentCols.some((name) => name.includes("_"))) {
    throw new SchemaError("positions.csv: trajectory figures support 1-d runs only");
  }
  if (agentCols.some((name, i) => name !== `x${i}`)) {
    throw new SchemaError("positions.csv: agent columns must be x0..x{N-1} in order");
  }
  const agents = agentCols.length;
  const out: PositionsData = {
    t: [],
    positions: Array.from({ length: agents }, () => []),
    active: [],
    agents,
  };
  for (const row of rows) {
    out.t.push(parseNumber(row[0]));
    for (let a = 0; a < agents; a++) {
      out.positions[a].push(parseNumber(row[1 + a]));
    }
    out.active.push(parseNumber(row[row.length - 1]));
  }
  return out;
}

export const GRID_HEADER = [
  "axis",
  "value",
  "outcome",
  "clustering_time",
  "final_V",
  "final_Wg",
  "min_dist_min",
];

export function parseGridCsv(text: string): GridRow[] {
  const { header, rows } = splitRows(text, "grid.csv");
  if (header.join(",") !== GRID_HEADER.join(",")) {
    throw new SchemaError(
      `grid.csv: expected header ${GRID_HEADER.join(",")}, got ${header.join(",")}`
    );
  }
  return rows.map((row) => ({
    axis: row[0],
    value: parseNumber(row[1]),
    outcome: row[2],
    clustering_time: row[3] === "" ? null : parseNumber(row[3]),
    final_V: parseNumber(row[4]),
    final_Wg: parseNumber(row[5]),
    min_dist_min: parseNumber(row[6]),
  }));
}
