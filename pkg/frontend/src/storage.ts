import { RatingDraft } from "./draft.js";

export type StorageLike = Pick<Storage, "getItem" | "setItem" | "removeItem">;

/** Persists unsubmitted drafts so a reload mid-item loses nothing. */
export class DraftStore {
  constructor(private storage: StorageLike) {}

  private key(annotator: string, itemId: number): string {
    return `fstkit-draft:${annotator}:${itemId}`;
  }

  save(draft: RatingDraft): void {
    this.storage.setItem(this.key(draft.annotator, draft.itemId), JSON.stringify(draft.toJSON()));
  }

  load(annotator: string, itemId: number): RatingDraft | null {
    const raw = this.storage.getItem(this.key(annotator, itemId));
    if (!raw) return null;
    try {
      return RatingDraft.fromJSON(JSON.parse(raw));
    } catch {
      return null;
    }
  }

  clear(annotator: string, itemId: number): void {
    this.storage.removeItem(this.key(annotator, itemId));
  }
}

/** The annotator identity, entered once and kept for the session. */
export class IdentityStore {
  constructor(private storage: StorageLike) {}

  get(): string | null {
    return this.storage.getItem("fstkit-annotator");
  }

  set(annotator: string): void {
    this.storage.setItem("fstkit-annotator", annotator);
  }
}
