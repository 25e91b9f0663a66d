import { CRITERIA, isScore } from "./types.js";
/** In-progress ratings for one item: 4 outputs x 3 criteria, all required
 * before the draft may be submitted. */
export class RatingDraft {
    constructor(annotator, itemId, displayIndices) {
        this.annotator = annotator;
        this.itemId = itemId;
        this.displayIndices = [...displayIndices].sort((a, b) => a - b);
        this.cells = new Map(this.displayIndices.map((d) => [d, {}]));
    }
    set(displayIndex, criterion, value) {
        const cell = this.cells.get(displayIndex);
        if (!cell)
            throw new Error(`unknown display index ${displayIndex}`);
        if (!isScore(value))
            throw new Error(`rating ${value} outside the 0..2 scale`);
        cell[criterion] = value;
    }
    get(displayIndex, criterion) {
        return this.cells.get(displayIndex)?.[criterion];
    }
    isComplete() {
        for (const cell of this.cells.values()) {
            for (const criterion of CRITERIA) {
                if (cell[criterion] === undefined)
                    return false;
            }
        }
        return true;
    }
    missingCount() {
        let missing = 0;
        for (const cell of this.cells.values()) {
            for (const criterion of CRITERIA) {
                if (cell[criterion] === undefined)
                    missing += 1;
            }
        }
        return missing;
    }
    /** One record per output, in display order; only valid when complete. */
    toRecords() {
        if (!this.isComplete()) {
            throw new Error(`draft incomplete: ${this.missingCount()} ratings missing`);
        }
        return this.displayIndices.map((d) => {
            const cell = this.cells.get(d);
            return {
                annotator: this.annotator,
                item_id: this.itemId,
                display_index: d,
                formality: cell.formality,
                fluency: cell.fluency,
                meaning: cell.meaning,
            };
        });
    }
    toJSON() {
        return {
            annotator: this.annotator,
            itemId: this.itemId,
            displayIndices: this.displayIndices,
            cells: Object.fromEntries(this.cells),
        };
    }
    static fromJSON(raw) {
        const obj = raw;
        const draft = new RatingDraft(obj.annotator, obj.itemId, obj.displayIndices);
        for (const [display, cell] of Object.entries(obj.cells)) {
            for (const criterion of CRITERIA) {
                const value = cell[criterion];
                if (value !== undefined)
                    draft.set(Number(display), criterion, value);
            }
        }
        return draft;
    }
}
