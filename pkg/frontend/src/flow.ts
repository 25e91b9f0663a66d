import { ApiClient } from "./api.js";
import { RatingDraft } from "./draft.js";

export interface SubmitOutcome {
  stored: number;
  duplicates: number;
}

/** Post one record per output, in display order.
 *
 * Duplicate responses (409) mean this output was already rated in an
 * earlier session; they are counted and skipped so the item can complete.
 * A 400 propagates as FieldError for the UI to highlight.
 */
export async function submitDraft(api: ApiClient, draft: RatingDraft): Promise<SubmitOutcome> {
  const outcome: SubmitOutcome = { stored: 0, duplicates: 0 };
  for (const record of draft.toRecords()) {
    const result = await api.submitRating(record);
    if (result === "stored") outcome.stored += 1;
    else outcome.duplicates += 1;
  }
  return outcome;
}
