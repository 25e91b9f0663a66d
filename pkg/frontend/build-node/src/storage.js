import { RatingDraft } from "./draft.js";
/** Persists unsubmitted drafts so a reload mid-item loses nothing. */
export class DraftStore {
    constructor(storage) {
        this.storage = storage;
    }
    key(annotator, itemId) {
        return `fstkit-draft:${annotator}:${itemId}`;
    }
    save(draft) {
        this.storage.setItem(this.key(draft.annotator, draft.itemId), JSON.stringify(draft.toJSON()));
    }
    load(annotator, itemId) {
        const raw = this.storage.getItem(this.key(annotator, itemId));
        if (!raw)
            return null;
        try {
            return RatingDraft.fromJSON(JSON.parse(raw));
        }
        catch {
            return null;
        }
    }
    clear(annotator, itemId) {
        this.storage.removeItem(this.key(annotator, itemId));
    }
}
/** The annotator identity, entered once and kept for the session. */
export class IdentityStore {
    constructor(storage) {
        this.storage = storage;
    }
    get() {
        return this.storage.getItem("fstkit-annotator");
    }
    set(annotator) {
        this.storage.setItem("fstkit-annotator", annotator);
    }
}
