/**
 * Grid snapping: all box edges live on a 1/32 grid, matching the raster
 * resolution the model generates at, so the editor can never produce a box
 * the condition map cannot represent.
 */

import { MIN_BOX_AREA } from "./schema.js";

export const GRID = 1 / 32;

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Point {
  x: number;
  y: number;
}

/** Snap a coordinate to the nearest grid line, clamped to [0, 1]. */
export function snap(v: number): number {
  const snapped = Math.round(v / GRID) * GRID;
  return Math.min(1, Math.max(0, snapped));
}

/**
 * Snap a box's corners to the grid, normalizing corner order. Returns null
 * when the snapped box collapses below the minimum representable area.
 */
export function snapBox(b: Box): Box | null {
  const x0 = snap(Math.min(b.x0, b.x1));
  const x1 = snap(Math.max(b.x0, b.x1));
  const y0 = snap(Math.min(b.y0, b.y1));
  const y1 = snap(Math.max(b.y0, b.y1));
  if ((x1 - x0) * (y1 - y0) < MIN_BOX_AREA) return null;
  return { x0, y0, x1, y1 };
}

/**
 * Turn a freehand stroke (any jittery point sequence in canvas units) into
 * one axis-aligned snapped box over its extent, or null if degenerate.
 */
export function strokeToBox(points: Point[]): Box | null {
  if (points.length === 0) return null;
  let x0 = Infinity;
  let y0 = Infinity;
  let x1 = -Infinity;
  let y1 = -Infinity;
  for (const p of points) {
    x0 = Math.min(x0, p.x);
    y0 = Math.min(y0, p.y);
    x1 = Math.max(x1, p.x);
    y1 = Math.max(y1, p.y);
  }
  return snapBox({ x0, y0, x1, y1 });
}
