/** Thin typed client over the annotation service's JSON API. */

import type {
  AnnotationRecord,
  AnnotationUpdate,
  FrameDetail,
  FramePage,
  Histogram,
  ViolationItem,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type SaveResult =
  | { ok: true; record: AnnotationRecord }
  | { ok: false; status: number; error: string; violations: ViolationItem[] };

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async getJson<T>(url: string): Promise<T> {
    const response = await this.fetchFn(url);
    if (!response.ok) {
      throw new Error(`GET ${url} failed with ${response.status}`);
    }
    return (await response.json()) as T;
  }

  listFrames(offset = 0, limit = 200): Promise<FramePage> {
    return this.getJson<FramePage>(`/api/frames?offset=${offset}&limit=${limit}`);
  }

  getFrame(frameId: string): Promise<FrameDetail> {
    return this.getJson<FrameDetail>(`/api/frames/${encodeURIComponent(frameId)}`);
  }

  getStats(): Promise<Histogram> {
    return this.getJson<Histogram>("/api/stats");
  }

  async saveAnnotation(frameId: string, update: AnnotationUpdate): Promise<SaveResult> {
    const response = await this.fetchFn(
      `/api/frames/${encodeURIComponent(frameId)}/annotation`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(update),
      },
    );
    const body = await response.json();
    if (response.ok) {
      return { ok: true, record: body as AnnotationRecord };
    }
    return {
      ok: false,
      status: response.status,
      error: typeof body?.error === "string" ? body.error : `save failed (${response.status})`,
      violations: Array.isArray(body?.violations) ? body.violations : [],
    };
  }
}
