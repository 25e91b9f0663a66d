import assert from "node:assert/strict";
import { test } from "node:test";
import { RatingDraft } from "../src/draft.js";
function fullDraft() {
    const draft = new RatingDraft("ann1", 7, [0, 1, 2, 3]);
    for (const d of [0, 1, 2, 3]) {
        draft.set(d, "formality", 2);
        draft.set(d, "fluency", 1);
        draft.set(d, "meaning", 0);
    }
    return draft;
}
test("incomplete until every output and criterion is set", () => {
    const draft = new RatingDraft("a", 1, [0, 1, 2, 3]);
    assert.equal(draft.isComplete(), false);
    assert.equal(draft.missingCount(), 12);
    draft.set(0, "formality", 1);
    assert.equal(draft.missingCount(), 11);
    assert.equal(draft.isComplete(), false);
});
test("complete draft produces one record per output in display order", () => {
    const records = fullDraft().toRecords();
    assert.equal(records.length, 4);
    assert.deepEqual(records.map((r) => r.display_index), [0, 1, 2, 3]);
    for (const record of records) {
        assert.equal(record.annotator, "ann1");
        assert.equal(record.item_id, 7);
        assert.equal(record.formality, 2);
        assert.equal(record.fluency, 1);
        assert.equal(record.meaning, 0);
    }
});
test("values outside 0..2 rejected", () => {
    const draft = new RatingDraft("a", 1, [0, 1, 2, 3]);
    assert.throws(() => draft.set(0, "formality", 3));
    assert.throws(() => draft.set(0, "fluency", -1));
});
test("unknown display index rejected", () => {
    const draft = new RatingDraft("a", 1, [0, 1, 2, 3]);
    assert.throws(() => draft.set(9, "formality", 1));
});
test("incomplete draft refuses to produce records", () => {
    const draft = new RatingDraft("a", 1, [0, 1, 2, 3]);
    assert.throws(() => draft.toRecords(), /incomplete/);
});
test("JSON round trip preserves ratings", () => {
    const draft = fullDraft();
    const again = RatingDraft.fromJSON(JSON.parse(JSON.stringify(draft.toJSON())));
    assert.deepEqual(again.toRecords(), draft.toRecords());
});
