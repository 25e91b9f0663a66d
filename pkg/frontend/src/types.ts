export const CRITERIA = ["formality", "fluency", "meaning"] as const;
export type Criterion = (typeof CRITERIA)[number];
export type Score = 0 | 1 | 2;

export interface ItemOutput {
  display_index: number;
  text: string;
}

export interface ItemPayload {
  id: number;
  source: string;
  outputs: ItemOutput[];
  rated_display_indices: number[];
}

export interface Progress {
  rated: number;
  total: number;
  records?: number;
}

export interface NextResponse {
  done: boolean;
  item?: ItemPayload;
  progress: Progress;
}

export interface RatingRecord {
  annotator: string;
  item_id: number;
  display_index: number;
  formality: number;
  fluency: number;
  meaning: number;
}

const ITEM_KEYS = ["id", "source", "outputs", "rated_display_indices"];
const OUTPUT_KEYS = ["display_index", "text"];

/** Reject any item payload carrying fields beyond the anonymized schema.
 * System identities live only in the server-side key file; an extra field
 * here would mean the server is leaking them. */
export function assertItemPayload(raw: unknown): ItemPayload {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("item payload is not an object");
  }
  const obj = raw as Record<string, unknown>;
  const extra = Object.keys(obj).filter((k) => !ITEM_KEYS.includes(k));
  if (extra.length > 0) {
    throw new Error(`item payload has unexpected fields: ${extra.join(", ")}`);
  }
  for (const key of ITEM_KEYS) {
    if (!(key in obj)) throw new Error(`item payload missing field ${key}`);
  }
  const outputs = obj.outputs;
  if (!Array.isArray(outputs) || outputs.length !== 4) {
    throw new Error("item payload must carry exactly 4 outputs");
  }
  for (const out of outputs) {
    const keys = Object.keys(out as object);
    const bad = keys.filter((k) => !OUTPUT_KEYS.includes(k));
    if (bad.length > 0) {
      throw new Error(`output entry has unexpected fields: ${bad.join(", ")}`);
    }
  }
  return raw as ItemPayload;
}

export function isScore(value: number): value is Score {
  return value === 0 || value === 1 || value === 2;
}
