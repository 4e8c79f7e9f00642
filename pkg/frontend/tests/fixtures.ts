/**
 * In-memory mocked service: implements the wire contract closely enough for
 * UI tests (deterministic per-seed entries, streaming, gallery persistence,
 * error bodies) without any generation model behind it.
 */

import { FetchLike } from "../src/api.js";
import {
  GalleryEntry,
  GenerateRequest,
  GenerateResponse,
  RequestEcho,
  VocabResponse,
} from "../src/schema.js";

export const MOCK_K_FIXATIONS = 6;

export interface CapturedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface MockService {
  fetchImpl: FetchLike;
  calls: CapturedCall[];
  galleries: Map<string, GenerateResponse>;
  /** Split streamed NDJSON into chunks of this byte length (stress framing). */
  streamChunkSize: number;
}

const VOCAB: VocabResponse = {
  grammar: "a {theme} {category} page with {count} elements",
  themes: ["light", "dark"],
  categories: ["form", "landing", "gallery", "article", "dashboard"],
  counts: [3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
  words: ["a", "page", "with", "elements"],
};

/** Tiny deterministic generator so fake scanpaths are stable per seed. */
function lcg(seed: number): () => number {
  let s = (seed >>> 0) || 1;
  return () => {
    s = (Math.imul(s, 1664525) + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}

function fakeScanpath(seed: number): [number, number][] {
  const next = lcg(seed);
  return Array.from({ length: MOCK_K_FIXATIONS }, () => [
    Math.round(next() * 1e4) / 1e4,
    Math.round(next() * 1e4) / 1e4,
  ]);
}

/** Fake image bytes: a pure function of the conditions + per-image seed, so
 * identical requests (pin-and-regenerate) yield byte-identical tiles. */
function fakePng(echo: RequestEcho, seed: number): string {
  const payload = {
    seed,
    steps: echo.steps,
    guidance: echo.guidance,
    prompt: echo.prompt,
    wireframe: echo.wireframe,
    flow_order: echo.flow_order,
    flow_points: echo.flow_points,
    unconditional: echo.unconditional,
  };
  return Buffer.from(JSON.stringify(payload)).toString("base64");
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function errorResponse(status: number, error: string, detail: string): Response {
  return jsonResponse({ error, detail }, status);
}

function buildEcho(req: GenerateRequest): RequestEcho {
  return {
    prompt: req.prompt ?? null,
    wireframe: req.wireframe ?? null,
    flow_order: req.flow_order ?? null,
    flow_points: req.flow_points ?? null,
    unconditional: req.unconditional ?? false,
    n: req.n ?? 1,
    steps: req.steps ?? 50,
    guidance: req.guidance ?? 4.0,
    seed: req.seed ?? 424242,
  };
}

function ndjsonStream(lines: string[], chunkSize: number): ReadableStream<Uint8Array> {
  const bytes = new TextEncoder().encode(lines.join("\n") + "\n");
  let offset = 0;
  return new ReadableStream({
    pull(controller) {
      if (offset >= bytes.length) {
        controller.close();
        return;
      }
      controller.enqueue(bytes.slice(offset, offset + chunkSize));
      offset += chunkSize;
    },
  });
}

export function makeMockService(): MockService {
  const calls: CapturedCall[] = [];
  const galleries = new Map<string, GenerateResponse>();
  const mock: MockService = {
    calls,
    galleries,
    streamChunkSize: 7,
    fetchImpl: async (url: string, init?: RequestInit): Promise<Response> => {
      const path = url.replace(/^https?:\/\/[^/]+/, "");
      const method = init?.method ?? "GET";
      const body = init?.body ? JSON.parse(String(init.body)) : undefined;
      calls.push({ url: path, method, body });

      if (path === "/health") {
        return jsonResponse({ status: "ready", model_hash: "mock", config: {} });
      }
      if (path === "/vocab") return jsonResponse(VOCAB);
      if (path.startsWith("/gallery/")) {
        const id = path.slice("/gallery/".length);
        const found = galleries.get(id);
        return found ? jsonResponse(found) : errorResponse(404, "unknown_gallery", id);
      }
      if (path === "/generate" && method === "POST") {
        const req = body as GenerateRequest;
        if (req.n !== undefined && (req.n < 1 || req.n > 64)) {
          return errorResponse(400, "bad_field", "n must be in [1, 64]");
        }
        if (req.flow_order && !req.wireframe) {
          return errorResponse(400, "missing_conditions", "flow_order requires a wireframe");
        }
        if (
          req.flow_order &&
          req.wireframe &&
          req.flow_order.some((i) => i < 0 || i >= req.wireframe!.elements.length)
        ) {
          return errorResponse(422, "flow_order_out_of_range", "index outside wireframe");
        }
        const echo = buildEcho(req);
        const gid = `g${galleries.size.toString().padStart(4, "0")}`;
        const entries: GalleryEntry[] = Array.from({ length: echo.n }, (_, i) => ({
          id: `${gid}:${i}`,
          index: i,
          seed: echo.seed + i,
          scanpath: fakeScanpath(echo.seed + i),
          png_base64: fakePng(echo, echo.seed + i),
        }));
        const response: GenerateResponse = {
          gallery_id: gid,
          seed: echo.seed,
          request: echo,
          entries,
        };
        galleries.set(gid, response);
        if (req.stream) {
          const lines = [
            JSON.stringify({ gallery_id: gid, seed: echo.seed, n: echo.n }),
            ...entries.map((e) => JSON.stringify(e)),
          ];
          return new Response(ndjsonStream(lines, mock.streamChunkSize), {
            status: 200,
            headers: { "content-type": "application/x-ndjson" },
          });
        }
        return jsonResponse(response);
      }
      return errorResponse(404, "not_found", path);
    },
  };
  return mock;
}
