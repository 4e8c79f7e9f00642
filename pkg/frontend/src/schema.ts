/**
 * Shared wire-format contract with the gallery service.
 *
 * Everything the UI sends or receives is typed here, and the overlay color
 * endpoints are pinned here so tests and rendering agree on exact values.
 */

export const ELEMENT_CLASSES = [
  "Button",
  "Text",
  "Image",
  "Icon",
  "NavigationBar",
  "InputField",
  "Toggle",
  "Checkbox",
  "ScrollElement",
] as const;

export type ElementClass = (typeof ELEMENT_CLASSES)[number];

export const DEVICES = ["mobile", "web"] as const;
export type Device = (typeof DEVICES)[number];

/** Wireframes hold 3..12 elements; bbox coordinates live in [0, 1]. */
export const MIN_ELEMENTS = 3;
export const MAX_ELEMENTS = 12;
export const MIN_BOX_AREA = 1e-4;

export interface WireframeElementJSON {
  class: ElementClass;
  /** [x0, y0, x1, y1], 0 <= x0 < x1 <= 1, 0 <= y0 < y1 <= 1 */
  bbox: [number, number, number, number];
  z: number;
}

export interface WireframeJSON {
  device: Device;
  canvas_aspect: number;
  elements: WireframeElementJSON[];
}

export interface GenerateRequest {
  prompt?: string | null;
  wireframe?: WireframeJSON | null;
  flow_order?: number[] | null;
  flow_points?: [number, number][] | null;
  unconditional?: boolean;
  n?: number;
  steps?: number;
  guidance?: number;
  seed?: number | null;
  stream?: boolean;
}

/** The service echoes the parsed request back with defaults filled in. */
export interface RequestEcho {
  prompt: string | null;
  wireframe: WireframeJSON | null;
  flow_order: number[] | null;
  flow_points: [number, number][] | null;
  unconditional: boolean;
  n: number;
  steps: number;
  guidance: number;
  seed: number;
}

export interface GalleryEntry {
  id: string;
  index: number;
  seed: number;
  scanpath: [number, number][];
  png_base64: string;
}

export interface GenerateResponse {
  gallery_id: string;
  seed: number;
  /** Echo of the parsed request; absent on streamed responses (the stream
   * header carries only gallery_id/seed/n — fetch the gallery for the echo). */
  request?: RequestEcho;
  entries: GalleryEntry[];
}

/** First NDJSON line of a streamed /generate response. */
export interface StreamHeader {
  gallery_id: string;
  seed: number;
  n: number;
}

export interface HealthResponse {
  status: "ready" | "no_model";
  model_hash: string | null;
  config: Record<string, unknown> | null;
}

export interface VocabResponse {
  grammar: string;
  themes: string[];
  categories: string[];
  counts: number[];
  words: string[];
}

export interface ServiceErrorBody {
  error: string;
  detail: string;
}

/**
 * Scanpath overlay color endpoints (first fixation -> last fixation).
 * Pinned as exact RGB so renderer and tests cannot drift apart.
 */
export const OVERLAY_START_RGB: [number, number, number] = [34, 197, 94]; // green
export const OVERLAY_END_RGB: [number, number, number] = [59, 130, 246]; // blue
