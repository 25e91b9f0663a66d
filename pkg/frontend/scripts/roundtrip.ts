/** Scripted annotation session against a live server.
 *
 * Drives the same client modules the browser UI uses: fetch next item,
 * fill a complete draft, submit one record per output, advance until the
 * completion marker. Ratings are a deterministic function of item id and
 * display index so the stored records can be checked externally.
 *
 * Usage: node roundtrip.js --base-url http://127.0.0.1:PORT --annotator ann1
 *        [--duplicate-first]  re-submit the first item afterwards and report
 *                             how the duplicates were handled
 */
import { ApiClient } from "../src/api.js";
import { RatingDraft } from "../src/draft.js";
import { submitDraft } from "../src/flow.js";
import { Criterion, Score } from "../src/types.js";

function arg(name: string): string | null {
  const index = process.argv.indexOf(name);
  return index >= 0 ? process.argv[index + 1] : null;
}

function scoreFor(itemId: number, displayIndex: number, criterion: Criterion): Score {
  const offset = { formality: 0, fluency: 1, meaning: 2 }[criterion];
  return ((itemId + displayIndex + offset) % 3) as Score;
}

async function main(): Promise<void> {
  const baseUrl = arg("--base-url");
  const annotator = arg("--annotator");
  if (!baseUrl || !annotator) {
    console.error("required: --base-url URL --annotator ID");
    process.exit(2);
  }
  const api = new ApiClient(baseUrl, (url, init) => fetch(url, init));
  let itemsRated = 0;
  let recordsPosted = 0;
  let firstDraft: RatingDraft | null = null;

  for (;;) {
    const next = await api.fetchNext(annotator);
    if (next.done) break;
    const item = next.item!;
    const draft = new RatingDraft(
      annotator,
      item.id,
      item.outputs.map((o) => o.display_index)
    );
    for (const output of item.outputs) {
      for (const criterion of ["formality", "fluency", "meaning"] as Criterion[]) {
        draft.set(output.display_index, criterion, scoreFor(item.id, output.display_index, criterion));
      }
    }
    const outcome = await submitDraft(api, draft);
    itemsRated += 1;
    recordsPosted += outcome.stored;
    if (!firstDraft) firstDraft = draft;
  }

  let duplicateOutcome = null;
  if (process.argv.includes("--duplicate-first")) {
    if (!firstDraft) throw new Error("no item was rated; cannot test duplicates");
    // The UI contract on 409: mark done locally, skip forward, keep going.
    duplicateOutcome = await submitDraft(api, firstDraft);
  }

  const progress = await api.fetchProgress(annotator);
  console.log(
    JSON.stringify({
      annotator,
      items_rated: itemsRated,
      records_posted: recordsPosted,
      rating_values_posted: recordsPosted * 3,
      duplicate_retry: duplicateOutcome,
      progress,
    })
  );
}

main().catch((err) => {
  console.error(String(err));
  process.exit(1);
});
