/** Series utilities: sentinel clipping and monotonicity checks. */

export interface ClippedSeries {
  values: number[];
  floor: number;
  clippedCount: number;
}

/**
 * Replace -Infinity entries by a floor slightly below the finite minimum,
 * so clustered runs render as a plunge to a visible bottom line.
 */
export function clipSentinels(values: number[], pad = 0.08): ClippedSeries {
  const finite = values.filter((v) => Number.isFinite(v));
  if (finite.length === 0) {
    return { values: values.map(() => -1), floor: -1, clippedCount: values.length };
  }
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const span = hi - lo;
  const floor = span > 0 ? lo - pad * span : lo - 1;
  let clipped = 0;
  const out = values.map((v) => {
    if (v === -Infinity) {
      clipped += 1;
      return floor;
    }
    return v;
  });
  return { values: out, floor, clippedCount: clipped };
}

export function isNonDecreasing(values: number[]): boolean {
  for (let i = 1; i < values.length; i++) {
    if (values[i] < values[i - 1]) return false;
  }
  return true;
}

/**
 * True when the finite part of the series ends with at least `k` strictly
 * decreasing values and the series then reaches the -Infinity sentinel.
 */
export function hasDecreasingTailToFloor(values: number[], k = 3): boolean {
  const firstSentinel = values.findIndex((v) => v === -Infinity);
  if (firstSentinel < 0) return false;
  const finite = values.slice(0, firstSentinel);
  if (finite.length < k || !finite.every((v) => Number.isFinite(v))) return false;
  for (let i = finite.length - k + 1; i < finite.length; i++) {
    if (!(finite[i] < finite[i - 1])) return false;
  }
  // once clustered, the run stays clustered
  return values.slice(firstSentinel).every((v) => v === -Infinity);
}
