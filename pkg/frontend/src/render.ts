/**
 * Figure builders: agent trajectories (controlled agent highlighted),
 * entropy time series with the clustered sentinel clipped to a floor, and
 * sweep outcome grids.  All output is deterministic SVG.
 */

import * as fs from "fs";
import * as path from "path";

import { parseGridCsv, parsePositionsCsv, parseSeriesCsv, SchemaError } from "./csv";
import { clipSentinels } from "./series";
import * as svg from "./svg";

export type PlotKind = "trajectories" | "entropy" | "phase-grid";

export interface PlotSpec {
  kind: PlotKind;
  input: string;
  output: string;
  highlightControlled?: boolean;
}

const AGENT_COLORS = [
  "#4c78a8", "#72b7b2", "#54a24b", "#b8a425", "#439894",
  "#7b7eb8", "#5c8aa8", "#6b9e42", "#8a9bb8", "#4f9e84",
];

export function renderTrajectoriesSvg(positionsCsv: string, highlight = true): string {
  const data = parsePositionsCsv(positionsCsv);
  const all: number[] = [];
  for (const series of data.positions) all.push(...series);
  const f = svg.frame(svg.extent(data.t), svg.extent(all));
  const body: string[] = [...svg.axes(f, "t", "position")];
  const xs = data.t.map(f.x);
  for (let a = 0; a < data.agents; a++) {
    const ys = data.positions[a].map(f.y);
    const color = AGENT_COLORS[a % AGENT_COLORS.length];
    body.push(
      `<path d="${svg.polylinePath(xs, ys)}" fill="none" stroke="${color}" stroke-width="1.2"/>`
    );
  }
  if (highlight) {
    // overlay the controlled agent in red, segment by segment
    for (let i = 1; i < data.t.length; i++) {
      const a = data.active[i - 1];
      if (a < 0) continue;
      body.push(
        `<line x1="${svg.px(xs[i - 1])}" y1="${svg.px(f.y(data.positions[a][i - 1]))}" ` +
          `x2="${svg.px(xs[i])}" y2="${svg.px(f.y(data.positions[a][i]))}" ` +
          `stroke="#d62728" stroke-width="2.4"/>`
      );
    }
    body.push(
      `<text x="${svg.WIDTH - svg.MARGIN.right}" y="16" font-size="11" text-anchor="end" fill="#d62728">controlled agent</text>`
    );
  }
  return svg.document(body, "agent positions");
}

export function renderEntropySvg(seriesCsv: string): string {
  const data = parseSeriesCsv(seriesCsv);
  const { values, floor, clippedCount } = clipSentinels(data.W_g);
  const f = svg.frame(svg.extent(data.t), svg.extent(values));
  const body: string[] = [...svg.axes(f, "t", "generalized entropy")];
  const xs = data.t.map(f.x);
  const ys = values.map(f.y);
  body.push(
    `<path d="${svg.polylinePath(xs, ys)}" fill="none" stroke="#4c78a8" stroke-width="1.6"/>`
  );
  if (clippedCount > 0) {
    const yFloor = svg.px(f.y(floor));
    body.push(
      `<line x1="${svg.MARGIN.left}" y1="${yFloor}" x2="${svg.WIDTH - svg.MARGIN.right}" ` +
        `y2="${yFloor}" stroke="#d62728" stroke-dasharray="5,4"/>`
    );
    body.push(
      `<text x="${svg.WIDTH - svg.MARGIN.right}" y="${svg.px(f.y(floor) - 6)}" font-size="11" ` +
        `text-anchor="end" fill="#d62728">clustered (entropy = -inf, clipped)</text>`
    );
  }
  return svg.document(body, "entropy evolution");
}

const OUTCOME_COLORS: Record<string, string> = {
  Consensus: "#d62728",
  Declustered: "#54a24b",
  BasinEntered: "#e8a838",
};

export function renderPhaseGridSvg(gridCsv: string): string {
  const rows = parseGridCsv(gridCsv);
  const body: string[] = [];
  const cell = Math.min(
    60,
    (svg.WIDTH - svg.MARGIN.left - svg.MARGIN.right) / Math.max(rows.length, 1)
  );
  const y0 = svg.HEIGHT / 2 - cell / 2;
  rows.forEach((row, i) => {
    const x = svg.MARGIN.left + i * cell;
    const color = OUTCOME_COLORS[row.outcome] ?? "#888";
    body.push(
      `<rect x="${svg.px(x)}" y="${svg.px(y0)}" width="${svg.px(cell - 2)}" height="${svg.px(cell - 2)}" fill="${color}"/>`
    );
    body.push(
      `<text x="${svg.px(x + cell / 2)}" y="${svg.px(y0 + cell + 14)}" font-size="10" text-anchor="middle" fill="#333">${svg.tickLabel(row.value)}</text>`
    );
  });
  const axis = rows.length > 0 ? rows[0].axis : "";
  body.push(
    `<text x="${svg.WIDTH / 2}" y="${svg.px(y0 - 16)}" font-size="12" text-anchor="middle" fill="#333">outcome by ${axis}</text>`
  );
  let lx = svg.MARGIN.left;
  for (const [name, color] of Object.entries(OUTCOME_COLORS)) {
    body.push(`<rect x="${lx}" y="${svg.HEIGHT - 26}" width="10" height="10" fill="${color}"/>`);
    body.push(
      `<text x="${lx + 14}" y="${svg.HEIGHT - 17}" font-size="11" fill="#333">${name}</text>`
    );
    lx += 120;
  }
  return svg.document(body, "sweep outcomes");
}

export function render(spec: PlotSpec): string {
  if (!fs.existsSync(spec.input)) {
    throw new SchemaError(`input file not found: ${spec.input}`);
  }
  const text = fs.readFileSync(spec.input, "utf-8");
  let out: string;
  if (spec.kind === "trajectories") {
    out = renderTrajectoriesSvg(text, spec.highlightControlled ?? true);
  } else if (spec.kind === "entropy") {
    out = renderEntropySvg(text);
  } else if (spec.kind === "phase-grid") {
    out = renderPhaseGridSvg(text);
  } else {
    throw new SchemaError(`unknown figure kind: ${(spec as PlotSpec).kind}`);
  }
  fs.mkdirSync(path.dirname(path.resolve(spec.output)), { recursive: true });
  fs.writeFileSync(spec.output, out + "\n", "utf-8");
  return spec.output;
}
