/**
 * Scanpath overlay geometry: K fixation circles joined by K-1 segments, with
 * color interpolating from the pinned start color (green, first fixation) to
 * the pinned end color (blue, last fixation) by fixation index.
 *
 * Geometry is computed DOM-free and serialized to an SVG string so tests can
 * assert on exact structure without a browser.
 */

import { OVERLAY_END_RGB, OVERLAY_START_RGB } from "./schema.js";

export interface OverlayCircle {
  cx: number;
  cy: number;
  r: number;
  color: string;
}

export interface OverlaySegment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: string;
}

export interface OverlayGeometry {
  circles: OverlayCircle[];
  segments: OverlaySegment[];
}

function lerpColor(t: number): string {
  const [r0, g0, b0] = OVERLAY_START_RGB;
  const [r1, g1, b1] = OVERLAY_END_RGB;
  const r = Math.round(r0 + (r1 - r0) * t);
  const g = Math.round(g0 + (g1 - g0) * t);
  const b = Math.round(b0 + (b1 - b0) * t);
  return `rgb(${r},${g},${b})`;
}

/** Color of fixation i out of k: 0 -> green endpoint, k-1 -> blue endpoint. */
export function colorAt(i: number, k: number): string {
  return lerpColor(k <= 1 ? 0 : i / (k - 1));
}

export function overlayGeometry(
  scanpath: [number, number][],
  size: number,
  radius = size / 24,
): OverlayGeometry {
  const k = scanpath.length;
  const pts = scanpath.map(([x, y]) => [x * size, y * size] as const);
  const circles = pts.map(([cx, cy], i) => ({ cx, cy, r: radius, color: colorAt(i, k) }));
  const segments = pts.slice(0, -1).map(([x1, y1], i) => ({
    x1,
    y1,
    x2: pts[i + 1][0],
    y2: pts[i + 1][1],
    // segment color sits halfway between its two endpoint fixations
    color: lerpColor(k <= 1 ? 0 : (i + 0.5) / (k - 1)),
  }));
  return { circles, segments };
}

const fmt = (v: number) => String(Math.round(v * 100) / 100);

/** Serialize to an <svg> string sized to overlay a square tile exactly. */
export function toSvg(geometry: OverlayGeometry, size: number): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${size} ${size}" ` +
      `width="${size}" height="${size}">`,
  ];
  for (const s of geometry.segments) {
    parts.push(
      `<line x1="${fmt(s.x1)}" y1="${fmt(s.y1)}" x2="${fmt(s.x2)}" y2="${fmt(s.y2)}" ` +
        `stroke="${s.color}" stroke-width="${fmt(size / 64)}" stroke-linecap="round"/>`,
    );
  }
  geometry.circles.forEach((c, i) => {
    parts.push(
      `<circle cx="${fmt(c.cx)}" cy="${fmt(c.cy)}" r="${fmt(c.r)}" fill="${c.color}" ` +
        `fill-opacity="0.85" stroke="white" stroke-width="${fmt(size / 128)}">` +
        `<title>fixation ${i + 1}</title></circle>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}
