export const CRITERIA = ["formality", "fluency", "meaning"];
const ITEM_KEYS = ["id", "source", "outputs", "rated_display_indices"];
const OUTPUT_KEYS = ["display_index", "text"];
/** Reject any item payload carrying fields beyond the anonymized schema.
 * System identities live only in the server-side key file; an extra field
 * here would mean the server is leaking them. */
export function assertItemPayload(raw) {
    if (typeof raw !== "object" || raw === null) {
        throw new Error("item payload is not an object");
    }
    const obj = raw;
    const extra = Object.keys(obj).filter((k) => !ITEM_KEYS.includes(k));
    if (extra.length > 0) {
        throw new Error(`item payload has unexpected fields: ${extra.join(", ")}`);
    }
    for (const key of ITEM_KEYS) {
        if (!(key in obj))
            throw new Error(`item payload missing field ${key}`);
    }
    const outputs = obj.outputs;
    if (!Array.isArray(outputs) || outputs.length !== 4) {
        throw new Error("item payload must carry exactly 4 outputs");
    }
    for (const out of outputs) {
        const keys = Object.keys(out);
        const bad = keys.filter((k) => !OUTPUT_KEYS.includes(k));
        if (bad.length > 0) {
            throw new Error(`output entry has unexpected fields: ${bad.join(", ")}`);
        }
    }
    return raw;
}
export function isScore(value) {
    return value === 0 || value === 1 || value === 2;
}
