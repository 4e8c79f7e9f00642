import { describe, expect, it } from "vitest";

import { GRID, Point, snap, snapBox, strokeToBox } from "../src/snap.js";

describe("grid snapping", () => {
  it("uses a 1/32 grid", () => {
    expect(GRID).toBe(1 / 32);
  });

  it("rounds to the nearest grid line and clamps to [0, 1]", () => {
    expect(snap(0.26)).toBe(0.25);
    expect(snap(0.27)).toBe(9 / 32);
    expect(snap(-0.2)).toBe(0);
    expect(snap(1.4)).toBe(1);
    expect(snap(17 / 32)).toBe(17 / 32);
  });

  it("normalizes corner order", () => {
    expect(snapBox({ x0: 0.75, y0: 0.5, x1: 0.25, y1: 0.125 })).toEqual({
      x0: 0.25,
      y0: 0.125,
      x1: 0.75,
      y1: 0.5,
    });
  });

  it("rejects boxes that snap below the minimum area", () => {
    // both edges land on the same grid line -> zero width
    expect(snapBox({ x0: 0.501, y0: 0.1, x1: 0.509, y1: 0.9 })).toBeNull();
    expect(snapBox({ x0: 0.2, y0: 0.2, x1: 0.2, y1: 0.2 })).toBeNull();
  });
});

/**
 * Jittered-rectangle fixture: a freehand stroke tracing the rectangle
 * (80, 80) -> (240, 240) on a 320-px canvas, with every sample displaced by
 * at most 3 px. 3/320 = 0.009375 is under half a grid cell (1/64 = 0.015625),
 * so the stroke must snap to exactly [0.25, 0.25, 0.75, 0.75].
 */
function jitteredRectangleStroke(): Point[] {
  const canvas = 320;
  const lo = 80;
  const hi = 240;
  // fixed jitter table in pixels, |j| <= 3
  const jitter = [3, -2, 1, -3, 2, 0, -1, 3, -2, 1, 2, -3, 0, 1, -1, 2];
  const pts: Array<[number, number]> = [];
  const steps = 8;
  for (let i = 0; i <= steps; i++) {
    const a = lo + ((hi - lo) * i) / steps;
    pts.push([a, lo], [a, hi], [lo, a], [hi, a]); // walk all four sides
  }
  return pts.map(([x, y], i) => ({
    x: (x + jitter[i % jitter.length]) / canvas,
    y: (y + jitter[(i + 5) % jitter.length]) / canvas,
  }));
}

describe("freehand stroke to box", () => {
  it("snaps a 3-px-jitter rectangle to one exact axis-aligned box", () => {
    expect(strokeToBox(jitteredRectangleStroke())).toEqual({
      x0: 0.25,
      y0: 0.25,
      x1: 0.75,
      y1: 0.75,
    });
  });

  it("returns null for an empty stroke", () => {
    expect(strokeToBox([])).toBeNull();
  });

  it("returns null for a stroke that never leaves one grid cell", () => {
    const pts = [
      { x: 0.5, y: 0.5 },
      { x: 0.503, y: 0.501 },
      { x: 0.501, y: 0.504 },
    ];
    expect(strokeToBox(pts)).toBeNull();
  });
});
