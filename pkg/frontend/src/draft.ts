import { CRITERIA, Criterion, RatingRecord, Score, isScore } from "./types.js";

interface DraftCell {
  formality?: Score;
  fluency?: Score;
  meaning?: Score;
}

/** In-progress ratings for one item: 4 outputs x 3 criteria, all required
 * before the draft may be submitted. */
export class RatingDraft {
  annotator: string;
  itemId: number;
  displayIndices: number[];
  private cells: Map<number, DraftCell>;

  constructor(annotator: string, itemId: number, displayIndices: number[]) {
    this.annotator = annotator;
    this.itemId = itemId;
    this.displayIndices = [...displayIndices].sort((a, b) => a - b);
    this.cells = new Map(this.displayIndices.map((d) => [d, {}]));
  }

  set(displayIndex: number, criterion: Criterion, value: number): void {
    const cell = this.cells.get(displayIndex);
    if (!cell) throw new Error(`unknown display index ${displayIndex}`);
    if (!isScore(value)) throw new Error(`rating ${value} outside the 0..2 scale`);
    cell[criterion] = value;
  }

  get(displayIndex: number, criterion: Criterion): Score | undefined {
    return this.cells.get(displayIndex)?.[criterion];
  }

  isComplete(): boolean {
    for (const cell of this.cells.values()) {
      for (const criterion of CRITERIA) {
        if (cell[criterion] === undefined) return false;
      }
    }
    return true;
  }

  missingCount(): number {
    let missing = 0;
    for (const cell of this.cells.values()) {
      for (const criterion of CRITERIA) {
        if (cell[criterion] === undefined) missing += 1;
      }
    }
    return missing;
  }

  /** One record per output, in display order; only valid when complete. */
  toRecords(): RatingRecord[] {
    if (!this.isComplete()) {
      throw new Error(`draft incomplete: ${this.missingCount()} ratings missing`);
    }
    return this.displayIndices.map((d) => {
      const cell = this.cells.get(d)!;
      return {
        annotator: this.annotator,
        item_id: this.itemId,
        display_index: d,
        formality: cell.formality!,
        fluency: cell.fluency!,
        meaning: cell.meaning!,
      };
    });
  }

  toJSON(): object {
    return {
      annotator: this.annotator,
      itemId: this.itemId,
      displayIndices: this.displayIndices,
      cells: Object.fromEntries(this.cells),
    };
  }

  static fromJSON(raw: unknown): RatingDraft {
    const obj = raw as {
      annotator: string;
      itemId: number;
      displayIndices: number[];
      cells: Record<string, DraftCell>;
    };
    const draft = new RatingDraft(obj.annotator, obj.itemId, obj.displayIndices);
    for (const [display, cell] of Object.entries(obj.cells)) {
      for (const criterion of CRITERIA) {
        const value = cell[criterion];
        if (value !== undefined) draft.set(Number(display), criterion, value);
      }
    }
    return draft;
  }
}
