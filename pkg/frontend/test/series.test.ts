import { describe, expect, it } from "vitest";

import { clipSentinels, hasDecreasingTailToFloor, isNonDecreasing } from "../src/series";

describe("clipSentinels", () => {
  it("replaces -Infinity with a floor below the finite minimum", () => {
    const { values, floor, clippedCount } = clipSentinels([-1, -2, -Infinity]);
    expect(clippedCount).toBe(1);
    expect(floor).toBeLessThan(-2);
    expect(values[2]).toBe(floor);
    expect(values.slice(0, 2)).toEqual([-1, -2]);
  });

  it("handles constant series", () => {
    const { floor } = clipSentinels([-3, -3, -Infinity]);
    expect(floor).toBe(-4);
  });
});

describe("monotonicity helpers", () => {
  it("isNonDecreasing", () => {
    expect(isNonDecreasing([1, 1, 2, 3])).toBe(true);
    expect(isNonDecreasing([1, 0.5])).toBe(false);
  });

  it("hasDecreasingTailToFloor accepts a genuine collapse", () => {
    expect(hasDecreasingTailToFloor([-1, -1.5, -2, -4, -Infinity, -Infinity])).toBe(true);
  });

  it("rejects series that never cluster", () => {
    expect(hasDecreasingTailToFloor([-1, -2, -3])).toBe(false);
  });

  it("rejects non-decreasing tails", () => {
    expect(hasDecreasingTailToFloor([-3, -2, -1, -Infinity])).toBe(false);
  });

  it("rejects runs that recover after clustering", () => {
    expect(hasDecreasingTailToFloor([-1, -2, -3, -Infinity, -2])).toBe(false);
  });
});
