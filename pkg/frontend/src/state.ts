/**
 * Editor state and the pure operations the UI performs on it.
 *
 * Elements carry stable ids so the flow order survives edits; ids never leak
 * into the wire format — export converts order entries to array indices, and
 * requests contain exactly the fields the service schema defines.
 */

import {
  Device,
  ELEMENT_CLASSES,
  ElementClass,
  GalleryEntry,
  GenerateRequest,
  MAX_ELEMENTS,
  MIN_BOX_AREA,
  RequestEcho,
  WireframeJSON,
} from "./schema.js";
import { Box, snap, snapBox } from "./snap.js";

export interface EditorElement extends Box {
  id: number;
  cls: ElementClass;
  z: number;
}

export interface PromptParts {
  theme: string;
  category: string;
  count: number;
}

export interface EditorState {
  elements: EditorElement[];
  /** Flow order as element ids, in click order. */
  order: number[];
  device: Device;
  promptEnabled: boolean;
  prompt: PromptParts;
  n: number;
  steps: number;
  guidance: number;
  seed: number | null;
  nextId: number;
}

export function initialState(): EditorState {
  return {
    elements: [],
    order: [],
    device: "web",
    promptEnabled: true,
    prompt: { theme: "light", category: "form", count: 5 },
    n: 4,
    steps: 50,
    guidance: 4.0,
    seed: null,
    nextId: 1,
  };
}

export function buildPrompt(p: PromptParts): string {
  return `a ${p.theme} ${p.category} page with ${p.count} elements`;
}

// -- element CRUD -------------------------------------------------------------

/**
 * Add a snapped box as a new element. Returns the new element's id, or null
 * when the box snaps below the minimum area or the wireframe is full
 * (callers surface both rejections inline).
 */
export function addElement(
  state: EditorState,
  box: Box,
  cls: ElementClass = "Button",
): number | null {
  const snapped = snapBox(box);
  if (snapped === null || state.elements.length >= MAX_ELEMENTS) return null;
  const id = state.nextId++;
  const z = state.elements.length ? Math.max(...state.elements.map((e) => e.z)) + 1 : 0;
  state.elements.push({ id, cls, z, ...snapped });
  return id;
}

export function elementById(state: EditorState, id: number): EditorElement {
  const el = state.elements.find((e) => e.id === id);
  if (!el) throw new Error(`no element with id ${id}`);
  return el;
}

/** Translate by (dx, dy), snapped, keeping the box inside the canvas. */
export function moveElement(state: EditorState, id: number, dx: number, dy: number): void {
  const el = elementById(state, id);
  const w = el.x1 - el.x0;
  const h = el.y1 - el.y0;
  const x0 = Math.min(1 - w, Math.max(0, snap(el.x0 + dx)));
  const y0 = Math.min(1 - h, Math.max(0, snap(el.y0 + dy)));
  el.x0 = x0;
  el.x1 = x0 + w;
  el.y0 = y0;
  el.y1 = y0 + h;
}

/**
 * Drag one corner to (x, y). The move is rejected (state unchanged) when the
 * resized box would snap below the minimum area.
 */
export function resizeElement(
  state: EditorState,
  id: number,
  corner: "nw" | "ne" | "sw" | "se",
  x: number,
  y: number,
): boolean {
  const el = elementById(state, id);
  const next: Box = { x0: el.x0, y0: el.y0, x1: el.x1, y1: el.y1 };
  if (corner === "nw" || corner === "sw") next.x0 = x;
  else next.x1 = x;
  if (corner === "nw" || corner === "ne") next.y0 = y;
  else next.y1 = y;
  const snapped = snapBox(next);
  if (snapped === null) return false;
  Object.assign(el, snapped);
  return true;
}

export function retypeElement(state: EditorState, id: number, cls: ElementClass): void {
  elementById(state, id).cls = cls;
}

/** Remove the element and drop it from the flow order (badges renumber). */
export function deleteElement(state: EditorState, id: number): void {
  elementById(state, id); // throws for unknown ids
  state.elements = state.elements.filter((e) => e.id !== id);
  state.order = state.order.filter((oid) => oid !== id);
}

// -- flow order ----------------------------------------------------------------

/** Click semantics: first click appends to the order, second click removes. */
export function toggleFlow(state: EditorState, id: number): void {
  elementById(state, id);
  const at = state.order.indexOf(id);
  if (at >= 0) state.order.splice(at, 1);
  else state.order.push(id);
}

/** 1-based badge number per element id currently in the order. */
export function flowBadges(state: EditorState): Map<number, number> {
  return new Map(state.order.map((id, i) => [id, i + 1]));
}

// -- serialization ---------------------------------------------------------------

const round6 = (v: number) => Math.round(v * 1e6) / 1e6;

export function exportWireframe(state: EditorState): WireframeJSON {
  return {
    device: state.device,
    canvas_aspect: 1.0,
    elements: state.elements.map((e) => ({
      class: e.cls,
      bbox: [round6(e.x0), round6(e.y0), round6(e.x1), round6(e.y1)],
      z: e.z,
    })),
  };
}

/**
 * Replace the wireframe under edit with an imported one. The flow order is
 * cleared (it referenced the old elements). Throws on malformed input.
 */
export function importWireframe(state: EditorState, json: WireframeJSON): void {
  if (!json || !Array.isArray(json.elements)) throw new Error("malformed wireframe JSON");
  const elements: EditorElement[] = json.elements.map((el) => {
    if (!(ELEMENT_CLASSES as readonly string[]).includes(el.class)) {
      throw new Error(`unknown element class ${JSON.stringify(el.class)}`);
    }
    const [x0, y0, x1, y1] = el.bbox.map(Number) as [number, number, number, number];
    if (!(x0 >= 0 && x0 < x1 && x1 <= 1 && y0 >= 0 && y0 < y1 && y1 <= 1)) {
      throw new Error(`bbox out of order or out of [0,1]: ${JSON.stringify(el.bbox)}`);
    }
    if ((x1 - x0) * (y1 - y0) < MIN_BOX_AREA) {
      throw new Error(`bbox area below ${MIN_BOX_AREA}`);
    }
    return { id: state.nextId++, cls: el.class, z: Number(el.z), x0, y0, x1, y1 };
  });
  const zs = new Set(elements.map((e) => e.z));
  if (zs.size !== elements.length) throw new Error("z values must be unique");
  state.elements = elements;
  state.order = [];
  if (json.device) state.device = json.device;
}

// -- request building --------------------------------------------------------------

/** Flow order as element indices into the exported elements array. */
export function orderAsIndices(state: EditorState): number[] {
  return state.order.map((id) => state.elements.findIndex((e) => e.id === id));
}

/**
 * The exact /generate payload for the current state: only service-schema
 * fields, with absent conditions omitted rather than sent as UI defaults.
 */
export function buildRequest(state: EditorState, stream = false): GenerateRequest {
  const req: GenerateRequest = {
    n: state.n,
    steps: state.steps,
    guidance: state.guidance,
  };
  if (state.promptEnabled) req.prompt = buildPrompt(state.prompt);
  if (state.elements.length > 0) req.wireframe = exportWireframe(state);
  if (state.order.length > 0) req.flow_order = orderAsIndices(state);
  if (state.seed !== null) req.seed = state.seed;
  if (stream) req.stream = true;
  // Elements are the only carrier of flow_order, so no prompt + no wireframe
  // means a fully unconditional request.
  if (!req.prompt && !req.wireframe) req.unconditional = true;
  return req;
}

/** Parse a grammar prompt ("a {theme} {category} page with {k} elements"). */
export function parsePrompt(prompt: string): PromptParts | null {
  const m = /^a (\S+) (\S+) page with (\d+) elements$/.exec(prompt);
  if (!m) return null;
  return { theme: m[1], category: m[2], count: Number(m[3]) };
}

// -- pinning ---------------------------------------------------------------------

export interface PinnedTile {
  seed: number;
  request: RequestEcho;
  png_base64: string;
}

/**
 * Copy a gallery entry's exact conditions + its per-image seed into the
 * editor, with n=1, so regenerating reproduces that tile byte-identically.
 */
export function applyPin(state: EditorState, entry: GalleryEntry, echo: RequestEcho): void {
  state.seed = entry.seed;
  state.n = 1;
  state.steps = echo.steps;
  state.guidance = echo.guidance;
  state.promptEnabled = echo.prompt !== null;
  if (echo.prompt !== null) {
    const parts = parsePrompt(echo.prompt);
    if (parts === null) throw new Error(`unparseable prompt ${JSON.stringify(echo.prompt)}`);
    state.prompt = parts;
  }
  if (echo.wireframe) {
    importWireframe(state, echo.wireframe);
    if (echo.flow_order) {
      state.order = echo.flow_order.map((idx) => state.elements[idx].id);
    }
  } else {
    state.elements = [];
    state.order = [];
  }
}
