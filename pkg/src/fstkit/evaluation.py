"""Automatic and human evaluation.

Corpus BLEU against up to four references (case-sensitive, punctuation split
off as tokens, no smoothing: any zero n-gram precision gives 0), plus the
human-evaluation apparatus: anonymized item batches, rating records, paired
bootstrap significance, and Pearson inter-annotator agreement.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation, UndefinedCorrelationError
from .textdata import Sentence

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

CRITERIA = ("formality", "fluency", "meaning")


def bleu_tokenize(text: str) -> list[str]:
    """Metric tokenization: split punctuation into separate tokens, keep case."""
    return _TOKEN_RE.findall(text)


@dataclass
class BleuReport:
    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_tokens: int
    ref_tokens: int

    def render(self) -> str:
        p = "/".join(f"{x:.4f}" for x in self.precisions)
        return (
            f"BLEU = {self.score:.2f} (precisions {p}, BP {self.brevity_penalty:.4f}, "
            f"hyp_len {self.hyp_tokens}, ref_len {self.ref_tokens})"
        )


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hyps: list[Sentence], refs: list[list[Sentence]]) -> BleuReport:
    """Corpus-level BLEU-4 with multi-reference clipping.

    Clipped counts use the per-n-gram maximum over an item's references; the
    brevity penalty compares against the closest reference length, ties
    resolved toward the shorter reference.
    """
    if len(hyps) != len(refs):
        raise ContractViolation(f"{len(hyps)} hypotheses vs {len(refs)} reference sets")
    if not hyps:
        raise ContractViolation("corpus_bleu requires at least one item")
    matches = [0, 0, 0, 0]
    totals = [0, 0, 0, 0]
    hyp_len = 0
    ref_len = 0
    for hyp, ref_set in zip(hyps, refs):
        if not ref_set:
            raise ContractViolation("every item needs at least one reference")
        h_tokens = bleu_tokenize(hyp.text)
        r_token_lists = [bleu_tokenize(r.text) for r in ref_set]
        hyp_len += len(h_tokens)
        ref_len += min(
            (abs(len(r) - len(h_tokens)), len(r)) for r in r_token_lists
        )[1]
        for n in range(1, 5):
            h_counts = _ngram_counts(h_tokens, n)
            totals[n - 1] += max(len(h_tokens) - n + 1, 0)
            if not h_counts:
                continue
            clipped = Counter()
            for r in r_token_lists:
                r_counts = _ngram_counts(r, n)
                for g in h_counts:
                    if g in r_counts:
                        clipped[g] = max(clipped[g], min(h_counts[g], r_counts[g]))
            matches[n - 1] += sum(clipped.values())

    precisions = tuple(
        (matches[i] / totals[i]) if totals[i] > 0 else 0.0 for i in range(4)
    )
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / max(hyp_len, 1))
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / 4.0) * 100.0
    return BleuReport(
        score=score,
        precisions=precisions,
        brevity_penalty=bp,
        hyp_tokens=hyp_len,
        ref_tokens=ref_len,
    )


def pearson(x, y) -> float:
    """Sample Pearson correlation; zero variance raises rather than returning 0."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ContractViolation("pearson needs two equal-length vectors of length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    vx = float((xd * xd).sum())
    vy = float((yd * yd).sum())
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance input")
    return float((xd * yd).sum() / math.sqrt(vx * vy))


# ---------------------------------------------------------------------------
# Human evaluation
# ---------------------------------------------------------------------------

N_SYSTEMS = 4


@dataclass
class HumanEvalItem:
    id: int
    source: str
    outputs: list[tuple[int, str]]  # (display_index, text), display order

    def __post_init__(self):
        if len(self.outputs) != N_SYSTEMS:
            raise ContractViolation(f"item {self.id} has {len(self.outputs)} outputs, expected 4")


@dataclass(frozen=True)
class RatingRecord:
    annotator: str
    item_id: int
    display_index: int
    formality: int
    fluency: int
    meaning: int

    def __post_init__(self):
        if not (0 <= self.display_index < N_SYSTEMS):
            raise ContractViolation(f"display_index {self.display_index} outside 0..3")
        for crit in CRITERIA:
            value = getattr(self, crit)
            if value not in (0, 1, 2):
                raise ContractViolation(f"{crit} rating {value!r} outside the 0..2 scale")


@dataclass
class AgreementReport:
    """Pearson agreement between the two annotators; None marks an undefined
    correlation (zero-variance ratings)."""

    pearson_formality: float | None
    pearson_fluency: float | None
    pearson_meaning: float | None


@dataclass
class HumanEvalReport:
    means: dict[str, dict[str, float]]
    p_values: dict[str, dict[str, float]]
    baseline: str
    agreement: AgreementReport
    n_items: int

    def render(self) -> str:
        lines = ["system formality fluency meaning"]
        for system in sorted(self.means):
            m = self.means[system]
            lines.append(
                f"{system} " + " ".join(f"{m[c]:.2f}" for c in CRITERIA)
            )
        lines.append(f"significance vs {self.baseline} (paired bootstrap, two-sided):")
        for system in sorted(self.p_values):
            p = self.p_values[system]
            lines.append(
                f"{system} " + " ".join(f"p_{c}={p[c]:.4f}" for c in CRITERIA)
            )
        a = self.agreement
        fmt = lambda v: "undefined" if v is None else f"{v:.4f}"
        lines.append(
            "agreement pearson: formality "
            f"{fmt(a.pearson_formality)} fluency {fmt(a.pearson_fluency)} "
            f"meaning {fmt(a.pearson_meaning)}"
        )
        return "\n".join(lines) + "\n"


def build_humaneval_batch(
    test_inputs: list[Sentence],
    system_outputs: dict[str, list[Sentence]],
    n: int,
    seed: int,
) -> tuple[list[HumanEvalItem], dict]:
    """Sample n items and shuffle the four system outputs per item.

    Returns (items, hidden_key); the key maps item id -> display_index ->
    system id and is stored separately from the annotator-facing items.
    """
    if len(system_outputs) != N_SYSTEMS:
        raise ContractViolation(f"the study design fixes 4 systems, got {len(system_outputs)}")
    for system, outputs in system_outputs.items():
        if len(outputs) != len(test_inputs):
            raise ContractViolation(
                f"system {system!r} has {len(outputs)} outputs for {len(test_inputs)} inputs"
            )
    if not (1 <= n <= len(test_inputs)):
        raise ContractViolation(f"cannot sample {n} items from {len(test_inputs)} inputs")
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(test_inputs))[:n]
    systems = sorted(system_outputs)
    items = []
    hidden_key: dict = {}
    for item_id, input_idx in enumerate(chosen):
        perm = rng.permutation(N_SYSTEMS)
        outputs = []
        key = {}
        for display_index, sys_pos in enumerate(perm):
            system = systems[sys_pos]
            outputs.append((display_index, system_outputs[system][input_idx].text))
            key[str(display_index)] = system
        items.append(HumanEvalItem(id=item_id, source=test_inputs[input_idx].text, outputs=outputs))
        hidden_key[str(item_id)] = key
    return items, hidden_key


def items_to_json(items: list[HumanEvalItem]) -> list[dict]:
    return [
        {
            "id": it.id,
            "source": it.source,
            "outputs": [{"display_index": d, "text": t} for d, t in it.outputs],
        }
        for it in items
    ]


def save_items(items: list[HumanEvalItem], path) -> None:
    Path(path).write_text(
        json.dumps(items_to_json(items), ensure_ascii=False, indent=1), encoding="utf-8"
    )


def load_items(path) -> list[HumanEvalItem]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        HumanEvalItem(
            id=entry["id"],
            source=entry["source"],
            outputs=[(o["display_index"], o["text"]) for o in entry["outputs"]],
        )
        for entry in raw
    ]


def save_key(hidden_key: dict, path) -> None:
    Path(path).write_text(json.dumps(hidden_key, indent=1), encoding="utf-8")


def load_key(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def rating_to_json(r: RatingRecord) -> dict:
    return {
        "annotator": r.annotator,
        "item_id": r.item_id,
        "display_index": r.display_index,
        "formality": r.formality,
        "fluency": r.fluency,
        "meaning": r.meaning,
    }


def rating_from_json(payload: dict) -> RatingRecord:
    try:
        return RatingRecord(
            annotator=str(payload["annotator"]),
            item_id=int(payload["item_id"]),
            display_index=int(payload["display_index"]),
            formality=int(payload["formality"]),
            fluency=int(payload["fluency"]),
            meaning=int(payload["meaning"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolation(f"malformed rating record: {exc}") from exc


def append_rating(record: RatingRecord, path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(rating_to_json(record)) + "\n")


def load_ratings(path) -> list[RatingRecord]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(rating_from_json(json.loads(line)))
    return records


def _paired_bootstrap_p(diffs: np.ndarray, n_boot: int, rng) -> float:
    if np.all(diffs == 0.0):
        return 1.0
    idx = rng.integers(0, len(diffs), size=(n_boot, len(diffs)))
    means = diffs[idx].mean(axis=1)
    p = 2.0 * min(float((means <= 0).mean()), float((means >= 0).mean()))
    return min(p, 1.0)


def aggregate_ratings(
    records: list[RatingRecord],
    hidden_key: dict,
    baseline_system: str,
    n_boot: int = 10000,
    seed: int = 0,
) -> HumanEvalReport:
    """Per-system means, paired-bootstrap significance vs the baseline, and
    two-annotator Pearson agreement over shared (item, output) ratings."""
    if not records:
        raise ContractViolation("no rating records")

    def system_of(r: RatingRecord) -> str:
        key = hidden_key.get(str(r.item_id))
        if key is None or str(r.display_index) not in key:
            raise ContractViolation(
                f"rating by {r.annotator!r} references unknown item {r.item_id} "
                f"display {r.display_index}"
            )
        return key[str(r.display_index)]

    systems = sorted({sys for key in hidden_key.values() for sys in key.values()})
    if baseline_system not in systems:
        raise ContractViolation(f"baseline {baseline_system!r} not among systems {systems}")

    by_system: dict[str, list[RatingRecord]] = {s: [] for s in systems}
    for r in records:
        by_system[system_of(r)].append(r)

    means = {
        s: {c: float(np.mean([getattr(r, c) for r in rs])) for c in CRITERIA}
        for s, rs in by_system.items()
        if rs
    }

    # item-level scores (mean over annotators) for the paired bootstrap
    item_scores: dict[str, dict[int, dict[str, list[int]]]] = {s: {} for s in systems}
    for r in records:
        s = system_of(r)
        per_item = item_scores[s].setdefault(r.item_id, {c: [] for c in CRITERIA})
        for c in CRITERIA:
            per_item[c].append(getattr(r, c))

    rng = np.random.default_rng(seed)
    p_values: dict[str, dict[str, float]] = {}
    base_items = item_scores[baseline_system]
    for s in systems:
        if not item_scores[s]:
            continue
        shared = sorted(set(item_scores[s]) & set(base_items))
        p_values[s] = {}
        for c in CRITERIA:
            diffs = np.array(
                [
                    np.mean(item_scores[s][i][c]) - np.mean(base_items[i][c])
                    for i in shared
                ]
            )
            p_values[s][c] = _paired_bootstrap_p(diffs, n_boot, rng) if shared else float("nan")

    annotators = sorted({r.annotator for r in records})
    if len(annotators) != 2:
        raise ContractViolation(f"agreement requires exactly 2 annotators, got {annotators}")
    by_ann: dict[str, dict[tuple[int, int], RatingRecord]] = {a: {} for a in annotators}
    for r in records:
        by_ann[r.annotator][(r.item_id, r.display_index)] = r
    shared_keys = sorted(set(by_ann[annotators[0]]) & set(by_ann[annotators[1]]))
    agreement_values = {}
    for c in CRITERIA:
        x = [getattr(by_ann[annotators[0]][k], c) for k in shared_keys]
        y = [getattr(by_ann[annotators[1]][k], c) for k in shared_keys]
        try:
            agreement_values[c] = pearson(x, y)
        except (UndefinedCorrelationError, ContractViolation):
            agreement_values[c] = None
    agreement = AgreementReport(
        pearson_formality=agreement_values["formality"],
        pearson_fluency=agreement_values["fluency"],
        pearson_meaning=agreement_values["meaning"],
    )
    n_items = len({r.item_id for r in records})
    return HumanEvalReport(
        means=means,
        p_values=p_values,
        baseline=baseline_system,
        agreement=agreement,
        n_items=n_items,
    )
