/**
 * Typed client for the gallery service. One generation may be in flight at a
 * time (the service serializes jobs anyway); streamed responses deliver
 * entries incrementally through a callback as NDJSON lines arrive.
 */

import {
  GalleryEntry,
  GenerateRequest,
  GenerateResponse,
  HealthResponse,
  ServiceErrorBody,
  StreamHeader,
  VocabResponse,
} from "./schema.js";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let body: Partial<ServiceErrorBody> = {};
  try {
    body = (await res.json()) as ServiceErrorBody;
  } catch {
    // non-JSON error body; fall through to generic fields
  }
  throw new ServiceError(res.status, body.error ?? "http_error", body.detail ?? res.statusText);
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private inFlight = false;

  constructor(
    public baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`);
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.getJson("/health");
  }

  vocab(): Promise<VocabResponse> {
    return this.getJson("/vocab");
  }

  gallery(id: string): Promise<GenerateResponse> {
    return this.getJson(`/gallery/${id}`);
  }

  /**
   * POST /generate. With `onEntry` the request streams: the callback fires
   * once per entry as it is sampled, and the resolved response carries the
   * accumulated entries. Rejects immediately if a generation is in flight.
   */
  async generate(
    request: GenerateRequest,
    onEntry?: (entry: GalleryEntry, index: number) => void,
  ): Promise<GenerateResponse> {
    if (this.inFlight) {
      throw new ServiceError(0, "busy", "a generation request is already in flight");
    }
    this.inFlight = true;
    try {
      const body = JSON.stringify(onEntry ? { ...request, stream: true } : request);
      const res = await this.fetchImpl(`${this.baseUrl}/generate`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
      });
      await raiseForStatus(res);
      if (!onEntry) return (await res.json()) as GenerateResponse;
      return await this.readStream(res, onEntry);
    } finally {
      this.inFlight = false;
    }
  }

  private async readStream(
    res: Response,
    onEntry: (entry: GalleryEntry, index: number) => void,
  ): Promise<GenerateResponse> {
    if (!res.body) throw new ServiceError(0, "no_body", "streaming response has no body");
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    let buffered = "";
    let header: StreamHeader | null = null;
    const entries: GalleryEntry[] = [];

    const consume = (line: string) => {
      if (!line.trim()) return;
      if (header === null) {
        header = JSON.parse(line) as StreamHeader;
        return;
      }
      const entry = JSON.parse(line) as GalleryEntry;
      entries.push(entry);
      onEntry(entry, entries.length - 1);
    };

    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffered += decoder.decode(value, { stream: true });
      const lines = buffered.split("\n");
      buffered = lines.pop() ?? "";
      for (const line of lines) consume(line);
    }
    buffered += decoder.decode();
    for (const line of buffered.split("\n")) consume(line);

    if (header === null) throw new ServiceError(0, "bad_stream", "stream ended before header");
    const h: StreamHeader = header;
    return { gallery_id: h.gallery_id, seed: h.seed, entries };
  }
}
