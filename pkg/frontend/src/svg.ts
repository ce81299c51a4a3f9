/** Minimal deterministic SVG assembly: fixed canvas, linear scales, paths. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 24, right: 20, bottom: 42, left: 64 };

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const f = ((v: number) => range[0] + ((v - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  return f;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) return [0, 1];
  return [lo, hi];
}

export function px(v: number): string {
  // two-decimal pixel coordinates keep the output byte-stable
  return v.toFixed(2);
}

export function polylinePath(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"}${px(xs[i])},${px(ys[i])}`);
  }
  return parts.join("");
}

export function ticks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const fullStep = step * mult;
  const start = Math.ceil(lo / fullStep) * fullStep;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += fullStep) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(6)).toString();
}

export interface Frame {
  x: Scale;
  y: Scale;
  body: string[];
}

export function frame(xDomain: [number, number], yDomain: [number, number]): Frame {
  const x = linearScale(xDomain, [MARGIN.left, WIDTH - MARGIN.right]);
  const y = linearScale(yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top]);
  return { x, y, body: [] };
}

export function axes(f: Frame, xLabel: string, yLabel: string): string[] {
  const out: string[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  out.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#333"/>`);
  out.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#333"/>`);
  for (const t of ticks(f.x.domain)) {
    const xp = px(f.x(t));
    out.push(`<line x1="${xp}" y1="${y0}" x2="${xp}" y2="${y0 + 4}" stroke="#333"/>`);
    out.push(
      `<text x="${xp}" y="${y0 + 18}" font-size="11" text-anchor="middle" fill="#333">${tickLabel(t)}</text>`
    );
  }
  for (const t of ticks(f.y.domain)) {
    const yp = px(f.y(t));
    out.push(`<line x1="${x0 - 4}" y1="${yp}" x2="${x0}" y2="${yp}" stroke="#333"/>`);
    out.push(
      `<text x="${x0 - 7}" y="${yp}" font-size="11" text-anchor="end" dominant-baseline="middle" fill="#333">${tickLabel(t)}</text>`
    );
  }
  out.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 8}" font-size="12" text-anchor="middle" fill="#333">${xLabel}</text>`
  );
  out.push(
    `<text x="14" y="${(y0 + y1) / 2}" font-size="12" text-anchor="middle" fill="#333" transform="rotate(-90 14 ${(y0 + y1) / 2})">${yLabel}</text>`
  );
  return out;
}

export function document(body: string[], title: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<title>${title}</title>`,
    ...body,
    `</svg>`,
  ].join("\n");
}
