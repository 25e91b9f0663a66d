import { assertItemPayload, NextResponse, Progress, RatingRecord } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** A 400 from the ratings endpoint; carries the offending field when the
 * server's message names one. */
export class FieldError extends Error {
  field: string | null;

  constructor(message: string, field: string | null) {
    super(message);
    this.field = field;
  }
}

export class NetworkError extends Error {}

export type SubmitResult = "stored" | "duplicate";

const FIELD_NAMES = ["formality", "fluency", "meaning", "display_index", "item_id", "annotator"];

function fieldFromMessage(message: string): string | null {
  for (const name of FIELD_NAMES) {
    if (message.includes(name)) return name;
  }
  return null;
}

export class ApiClient {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async get(path: string): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (!response.ok) {
      throw new NetworkError(`GET ${path} -> ${response.status}`);
    }
    return response.json();
  }

  async fetchNext(annotator: string): Promise<NextResponse> {
    const raw = (await this.get(
      `/api/items/next?annotator=${encodeURIComponent(annotator)}`
    )) as NextResponse;
    if (!raw.done && raw.item) {
      assertItemPayload(raw.item);
    }
    return raw;
  }

  async fetchProgress(annotator: string): Promise<Progress> {
    return (await this.get(
      `/api/progress?annotator=${encodeURIComponent(annotator)}`
    )) as Progress;
  }

  async submitRating(record: RatingRecord): Promise<SubmitResult> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + "/api/ratings", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(record),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (response.status === 201) return "stored";
    if (response.status === 409) return "duplicate";
    const payload = (await response.json().catch(() => ({ error: "unknown" }))) as {
      error?: string;
    };
    const message = payload.error ?? `HTTP ${response.status}`;
    if (response.status === 400) {
      throw new FieldError(message, fieldFromMessage(message));
    }
    throw new NetworkError(message);
  }
}
