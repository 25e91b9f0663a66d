import { assertItemPayload } from "./types.js";
/** A 400 from the ratings endpoint; carries the offending field when the
 * server's message names one. */
export class FieldError extends Error {
    constructor(message, field) {
        super(message);
        this.field = field;
    }
}
export class NetworkError extends Error {
}
const FIELD_NAMES = ["formality", "fluency", "meaning", "display_index", "item_id", "annotator"];
function fieldFromMessage(message) {
    for (const name of FIELD_NAMES) {
        if (message.includes(name))
            return name;
    }
    return null;
}
export class ApiClient {
    constructor(baseUrl, fetchFn) {
        this.baseUrl = baseUrl.replace(/\/$/, "");
        this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
    }
    async get(path) {
        let response;
        try {
            response = await this.fetchFn(this.baseUrl + path);
        }
        catch (err) {
            throw new NetworkError(String(err));
        }
        if (!response.ok) {
            throw new NetworkError(`GET ${path} -> ${response.status}`);
        }
        return response.json();
    }
    async fetchNext(annotator) {
        const raw = (await this.get(`/api/items/next?annotator=${encodeURIComponent(annotator)}`));
        if (!raw.done && raw.item) {
            assertItemPayload(raw.item);
        }
        return raw;
    }
    async fetchProgress(annotator) {
        return (await this.get(`/api/progress?annotator=${encodeURIComponent(annotator)}`));
    }
    async submitRating(record) {
        let response;
        try {
            response = await this.fetchFn(this.baseUrl + "/api/ratings", {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify(record),
            });
        }
        catch (err) {
            throw new NetworkError(String(err));
        }
        if (response.status === 201)
            return "stored";
        if (response.status === 409)
            return "duplicate";
        const payload = (await response.json().catch(() => ({ error: "unknown" })));
        const message = payload.error ?? `HTTP ${response.status}`;
        if (response.status === 400) {
            throw new FieldError(message, fieldFromMessage(message));
        }
        throw new NetworkError(message);
    }
}
