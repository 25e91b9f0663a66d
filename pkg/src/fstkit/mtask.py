"""Multi-task transfer: grammatical-error-correction data as augmented pairs.

Each M2 record becomes (ungrammatical source, corrected target) pairs; the
correction knowledge transfers to formality rewriting, where informal text
is usually also ungrammatical.
"""

from __future__ import annotations

from .errors import ContractViolation
from .textdata import M2Record, ParallelDataset, apply_edits


def mtask_pairs(
    records: list[M2Record],
    annotators: str = "all",
    source_files: list[str] | None = None,
) -> ParallelDataset:
    """Apply M2 edits into parallel pairs.

    `annotators="all"` yields one pair per annotator with real edits;
    `"first"` uses only each record's lowest annotator id. Identity results
    are excluded. Output order is (record order, then annotator id).
    """
    if annotators not in ("all", "first"):
        raise ContractViolation(f"annotators must be 'all' or 'first', got {annotators!r}")
    pairs = []
    for record in records:
        ids = record.annotators()
        if annotators == "first":
            ids = ids[:1]
        for annotator in ids:
            pair = apply_edits(record, annotator)
            if pair is not None:
                pairs.append(pair)
    metadata = {"method": "mtask", "annotators": annotators, "records": str(len(records))}
    if source_files:
        metadata["source_files"] = ",".join(str(f) for f in source_files)
    return ParallelDataset(pairs, metadata=metadata)
