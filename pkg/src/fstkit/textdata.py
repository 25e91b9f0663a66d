"""Corpus and parallel-dataset handling.

Covers file ingestion (line corpora, TSV parallel data, M2-annotated GEC
data), JSON-lines interchange, dataset balancing and statistics, and the
seeded synthetic formal/informal corpus generator used by the desk-scale
benchmarks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractViolation, ParseError

PROVENANCES = ("original", "bt", "fdis", "mtask")
PIVOTS = ("fr", "de", "zh", "mock-strong", "mock-medium", "mock-weak")


def normalize_text(text: str) -> str:
    """Collapse interior whitespace to single spaces and strip the ends."""
    return " ".join(text.split())


@dataclass(frozen=True)
class Sentence:
    """A normalized sentence: no leading/trailing/duplicate whitespace, no newlines."""

    text: str

    def __post_init__(self):
        norm = normalize_text(self.text)
        if not norm:
            raise ContractViolation("sentence is empty after normalization")
        object.__setattr__(self, "text", norm)

    def tokens(self) -> list[str]:
        return self.text.split()

    def __str__(self) -> str:
        return self.text


@dataclass
class Corpus:
    sentences: list[Sentence]
    name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def _check_score(value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise ContractViolation(f"formality score {value} outside [0, 1]")
    return float(value)


@dataclass(frozen=True)
class ParallelPair:
    """One (source, target) sentence pair with provenance.

    Pivot language and formality scores are carried only by pairs produced
    by formality discrimination.
    """

    source: Sentence
    target: Sentence
    provenance: str = "original"
    pivot: str | None = None
    source_score: float | None = None
    target_score: float | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ContractViolation(f"unknown provenance {self.provenance!r}")
        is_fdis = self.provenance == "fdis"
        if is_fdis:
            if self.pivot not in PIVOTS:
                raise ContractViolation("fdis pair requires a pivot language")
            if self.source_score is None or self.target_score is None:
                raise ContractViolation("fdis pair requires both formality scores")
            _check_score(self.source_score)
            _check_score(self.target_score)
        else:
            if self.pivot is not None:
                raise ContractViolation("pivot is only valid on fdis pairs")
            if self.source_score is not None or self.target_score is not None:
                raise ContractViolation("formality scores are only valid on fdis pairs")


@dataclass
class ParallelDataset:
    pairs: list[ParallelPair]
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class Edit:
    """One M2 edit: replace source tokens [start, end) with `replacement`."""

    start: int
    end: int
    type: str
    replacement: str
    annotator: int

    @property
    def is_noop(self) -> bool:
        return self.start == -1 and self.end == -1


@dataclass
class M2Record:
    source_tokens: list[str]
    edits: list[Edit]

    def annotators(self) -> list[int]:
        return sorted({e.annotator for e in self.edits})


@dataclass
class MultiRefTestSet:
    """Evaluation items pairing one source with exactly 4 reference rewrites."""

    items: list[tuple[Sentence, tuple[Sentence, Sentence, Sentence, Sentence]]]

    def __post_init__(self):
        for i, (_, refs) in enumerate(self.items):
            if len(refs) != 4:
                raise ContractViolation(f"item {i} has {len(refs)} references, expected 4")

    def __len__(self) -> int:
        return len(self.items)


# ---------------------------------------------------------------------------
# File IO
# ---------------------------------------------------------------------------


def _read_utf8(path) -> str:
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from exc


def load_corpus(path, format: str = "lines") -> Corpus | ParallelDataset:
    """Load a line corpus or a `source<TAB>target` parallel file.

    Blank lines are skipped in both formats.
    """
    text = _read_utf8(path)
    if format == "lines":
        sentences = [Sentence(line) for line in text.splitlines() if line.strip()]
        return Corpus(sentences, name=Path(path).name)
    if format == "tsv_parallel":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if "\t" not in line:
                raise ParseError("expected source<TAB>target", line=lineno)
            src, tgt = line.split("\t", 1)
            pairs.append(ParallelPair(Sentence(src), Sentence(tgt)))
        return ParallelDataset(pairs, metadata={"source_file": str(path)})
    raise ContractViolation(f"unknown corpus format {format!r}")


def save_corpus(corpus: Corpus, path) -> None:
    Path(path).write_text("".join(s.text + "\n" for s in corpus.sentences), encoding="utf-8")


def save_tsv(dataset: ParallelDataset, path) -> None:
    lines = [f"{p.source.text}\t{p.target.text}\n" for p in dataset.pairs]
    Path(path).write_text("".join(lines), encoding="utf-8")


def save_jsonl(dataset: ParallelDataset, path) -> None:
    """Write the JSON-lines interchange format, one pair per line."""
    with open(path, "w", encoding="utf-8") as fh:
        if dataset.metadata:
            fh.write(json.dumps({"_metadata": dataset.metadata}, ensure_ascii=False) + "\n")
        for p in dataset.pairs:
            record = {
                "src": p.source.text,
                "tgt": p.target.text,
                "provenance": p.provenance,
                "pivot": p.pivot,
                "p_src": p.source_score,
                "p_tgt": p.target_score,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_jsonl(path) -> ParallelDataset:
    pairs = []
    metadata: dict[str, str] = {}
    for lineno, line in enumerate(_read_utf8(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        if "_metadata" in record:
            metadata = dict(record["_metadata"])
            continue
        pairs.append(
            ParallelPair(
                Sentence(record["src"]),
                Sentence(record["tgt"]),
                provenance=record.get("provenance", "original"),
                pivot=record.get("pivot"),
                source_score=record.get("p_src"),
                target_score=record.get("p_tgt"),
            )
        )
    return ParallelDataset(pairs, metadata=metadata)


def save_multiref(testset: MultiRefTestSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for src, refs in testset.items:
            fh.write(
                json.dumps({"src": src.text, "refs": [r.text for r in refs]}, ensure_ascii=False)
                + "\n"
            )


def load_multiref(path) -> MultiRefTestSet:
    items = []
    for lineno, line in enumerate(_read_utf8(path).splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        refs = tuple(Sentence(r) for r in record["refs"])
        if len(refs) != 4:
            raise ParseError(f"expected 4 references, got {len(refs)}", line=lineno)
        items.append((Sentence(record["src"]), refs))
    return MultiRefTestSet(items)


# ---------------------------------------------------------------------------
# M2 grammatical-error-correction format
# ---------------------------------------------------------------------------


def parse_m2(text: str) -> list[M2Record]:
    """Parse M2 blocks: an `S <tokens>` line followed by `A ...` edit lines.

    Noop annotations (`-1 -1|||noop`) are kept so the annotator id is known
    to have reviewed the sentence. Edits are normalized to be sorted by
    (annotator, start, end).
    """
    records: list[M2Record] = []
    tokens: list[str] | None = None
    edits: list[Edit] = []

    def flush():
        nonlocal tokens, edits
        if tokens is not None:
            records.append(M2Record(tokens, _normalize_edits(edits, len(tokens))))
        tokens, edits = None, []

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("S ") or line == "S":
            flush()
            tokens = line[2:].split()
        elif line.startswith("A "):
            if tokens is None:
                raise ParseError("A line before any S line", line=lineno)
            fields = line[2:].split("|||")
            if len(fields) < 3:
                raise ParseError("A line needs at least span, type and replacement", line=lineno)
            span = fields[0].split()
            if len(span) != 2:
                raise ParseError("edit span must be two integers", line=lineno)
            try:
                start, end = int(span[0]), int(span[1])
                annotator = int(fields[-1])
            except ValueError as exc:
                raise ParseError(f"non-integer field: {exc}", line=lineno) from exc
            replacement = fields[2].strip()
            if replacement == "-NONE-":
                replacement = ""
            noop = start == -1 and end == -1
            if not noop and not (0 <= start <= end <= len(tokens)):
                raise ParseError(
                    f"edit span {start}..{end} outside sentence of {len(tokens)} tokens",
                    line=lineno,
                )
            edits.append(Edit(start, end, fields[1], replacement, annotator))
        else:
            raise ParseError(f"unexpected line {line[:40]!r}", line=lineno)
    flush()
    return records


def _normalize_edits(edits: list[Edit], n_tokens: int) -> list[Edit]:
    ordered = sorted(edits, key=lambda e: (e.annotator, e.start, e.end))
    prev_by_ann: dict[int, Edit] = {}
    for e in ordered:
        if e.is_noop:
            continue
        prev = prev_by_ann.get(e.annotator)
        if prev is not None and e.start < prev.end:
            raise ParseError(
                f"overlapping edits for annotator {e.annotator}: "
                f"{prev.start}..{prev.end} and {e.start}..{e.end}"
            )
        prev_by_ann[e.annotator] = e
    return ordered


def serialize_m2(records: list[M2Record]) -> str:
    blocks = []
    for rec in records:
        lines = ["S " + " ".join(rec.source_tokens)]
        for e in rec.edits:
            if e.is_noop:
                lines.append(f"A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||{e.annotator}")
            else:
                lines.append(
                    f"A {e.start} {e.end}|||{e.type}|||{e.replacement}|||REQUIRED|||-NONE-|||{e.annotator}"
                )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def apply_edits(record: M2Record, annotator: int) -> ParallelPair | None:
    """Apply one annotator's edits; returns None for identity results.

    Edits are applied right-to-left so earlier spans keep their indices.
    """
    source_tokens = list(record.source_tokens)
    if not source_tokens:
        return None
    real_edits = [e for e in record.edits if e.annotator == annotator and not e.is_noop]
    if not real_edits:
        return None
    tokens = list(source_tokens)
    for e in sorted(real_edits, key=lambda e: (e.start, e.end), reverse=True):
        if not (0 <= e.start <= e.end <= len(source_tokens)):
            raise ContractViolation(f"edit span {e.start}..{e.end} out of range")
        tokens[e.start : e.end] = e.replacement.split()
    if tokens == source_tokens or not tokens:
        return None
    return ParallelPair(
        Sentence(" ".join(source_tokens)), Sentence(" ".join(tokens)), provenance="mtask"
    )


# ---------------------------------------------------------------------------
# Balancing and statistics
# ---------------------------------------------------------------------------

BALANCE_MODES = ("none", "up_sample", "down_sample")


def balance(
    original: ParallelDataset,
    augmented: ParallelDataset,
    mode: str = "none",
    seed: int = 0,
) -> ParallelDataset:
    """Combine original and augmented data under a balancing strategy.

    down_sample draws |original| augmented pairs without replacement;
    up_sample repeats the original data to the augmented size. The combined
    list is shuffled deterministically by `seed`.
    """
    if mode not in BALANCE_MODES:
        raise ContractViolation(f"unknown balance mode {mode!r}")
    if mode != "none" and (not original.pairs or not augmented.pairs):
        raise ContractViolation(f"balance mode {mode!r} requires non-empty datasets")

    rng = np.random.default_rng(seed)
    if mode == "none":
        combined = list(original.pairs) + list(augmented.pairs)
    elif mode == "down_sample":
        if len(augmented.pairs) < len(original.pairs):
            raise ContractViolation(
                "down_sample needs at least |original| augmented pairs "
                f"({len(augmented.pairs)} < {len(original.pairs)})"
            )
        idx = rng.permutation(len(augmented.pairs))[: len(original.pairs)]
        combined = list(original.pairs) + [augmented.pairs[i] for i in idx]
    else:  # up_sample
        repeats = math.ceil(len(augmented.pairs) / len(original.pairs))
        repeated = (list(original.pairs) * repeats)[: len(augmented.pairs)]
        combined = repeated + list(augmented.pairs)

    order = rng.permutation(len(combined))
    pairs = [combined[i] for i in order]
    return ParallelDataset(
        pairs,
        metadata={
            "balance_mode": mode,
            "balance_seed": str(seed),
            "n_original": str(len(original.pairs)),
            "n_augmented": str(len(augmented.pairs)),
        },
    )


@dataclass
class StatReport:
    total: int
    by_provenance: dict[str, int]
    by_pivot: dict[str, int]
    mean_source_len: float
    mean_target_len: float

    def render(self) -> str:
        lines = [
            f"total {self.total}",
            f"mean_source_len {self.mean_source_len:.2f}",
            f"mean_target_len {self.mean_target_len:.2f}",
            "by provenance:",
        ]
        lines += [f"{p} {self.by_provenance[p]}" for p in PROVENANCES if p in self.by_provenance]
        lines.append("by pivot:")
        lines += [f"{p} {self.by_pivot[p]}" for p in PIVOTS if p in self.by_pivot]
        return "\n".join(lines) + "\n"


def dataset_stats(dataset: ParallelDataset) -> StatReport:
    by_prov: dict[str, int] = {}
    by_pivot: dict[str, int] = {}
    src_tokens = 0
    tgt_tokens = 0
    for p in dataset.pairs:
        by_prov[p.provenance] = by_prov.get(p.provenance, 0) + 1
        if p.pivot is not None:
            by_pivot[p.pivot] = by_pivot.get(p.pivot, 0) + 1
        src_tokens += len(p.source.tokens())
        tgt_tokens += len(p.target.tokens())
    n = len(dataset.pairs)
    return StatReport(
        total=n,
        by_provenance=by_prov,
        by_pivot=by_pivot,
        mean_source_len=src_tokens / n if n else 0.0,
        mean_target_len=tgt_tokens / n if n else 0.0,
    )


def dedup_pairs(dataset: ParallelDataset) -> ParallelDataset:
    """Drop repeated (source, target) pairs, keeping the first occurrence."""
    seen: set[tuple[str, str]] = set()
    kept = []
    for p in dataset.pairs:
        key = (p.source.text, p.target.text)
        if key not in seen:
            seen.add(key)
            kept.append(p)
    meta = dict(dataset.metadata)
    meta["dedup"] = "true"
    return ParallelDataset(kept, metadata=meta)


# ---------------------------------------------------------------------------
# Synthetic formal/informal corpus
# ---------------------------------------------------------------------------

INFORMAL_WORD_MAP = {
    "you": "u",
    "are": "r",
    "because": "cuz",
    "to": "2",
    "your": "ur",
    "please": "plz",
}
FILLERS = ("lol", "btw", "imo")
FILLER_PROB = 0.3
_TERMINAL_PUNCT = (".", "?", "!")

VERBS = (
    "send", "review", "update", "confirm", "cancel", "submit", "prepare",
    "approve", "forward", "complete", "examine", "collect", "deliver",
    "archive", "extend", "renew", "verify", "discuss", "finalize", "share",
)
NOUNS = (
    "report", "letter", "document", "invoice", "schedule", "proposal", "ticket",
    "package", "order", "account", "payment", "form", "record", "file", "summary",
    "contract", "receipt", "booking", "request", "statement", "agenda", "budget",
    "notice", "manual", "certificate", "transcript", "estimate", "itinerary",
    "brochure", "questionnaire",
)
ADJS = (
    "important", "urgent", "final", "detailed", "recent", "official", "revised",
    "updated", "brief", "pending", "annual", "corrected", "preliminary",
    "confidential", "approved",
)
PEOPLE = (
    "manager", "team", "customer", "director", "assistant", "committee",
    "supervisor", "client", "colleague", "accountant", "secretary", "auditor",
    "registrar", "coordinator", "treasurer",
)
TIMES = (
    "tomorrow", "today", "at noon", "next week", "this month", "on friday",
    "this afternoon", "before the weekend", "next quarter", "by the deadline",
)

_SLOT_VALUES = {
    "verb": VERBS,
    "noun": NOUNS,
    "adj": ADJS,
    "person": PEOPLE,
    "time": TIMES,
}

TEMPLATES = (
    "Please {verb} the {adj} {noun} to me.",
    "I would like you to {verb} the {noun} because it is {adj}.",
    "Your {noun} is ready and you are welcome to collect it.",
    "Thank you for sending the {adj} {noun} to the {person}.",
    "We are pleased to confirm your {noun} for {time}.",
    "Please contact the {person} if you have questions about the {noun}.",
    "The {person} will {verb} your {noun} {time}.",
    "You are required to {verb} the {noun} before {time}.",
    "I am writing to request the {adj} {noun} from the {person}.",
    "Because the {noun} is {adj}, please {verb} it as soon as possible.",
    "The {person} has agreed to {verb} the {noun} {time}.",
    "Please let me know when you are able to {verb} the {noun}.",
    "I believe the {adj} {noun} should be sent to the {person}.",
    "We kindly ask you to {verb} your {noun} before the meeting.",
    "It is important to {verb} the {noun} because the {person} needs it.",
    "Your {adj} {noun} has been forwarded to the {person}.",
    "Could you please {verb} the {noun} for the {person}?",
    "The {noun} you requested is attached to this letter.",
    "Please remember to {verb} the {adj} {noun} {time}.",
    "I am happy to inform you that your {noun} has been approved.",
    "Would you be able to {verb} the {noun} before {time}?",
    "The committee has decided to {verb} the {adj} {noun}.",
    "Please ensure that the {noun} is {adj} before you {verb} it.",
    "You are invited to discuss the {noun} with the {person} {time}.",
)

_TEMPLATE_SLOTS = []
for _t in TEMPLATES:
    _slots = []
    for _name in _SLOT_VALUES:
        if "{" + _name + "}" in _t:
            _slots.append(_name)
    _TEMPLATE_SLOTS.append(tuple(_slots))


def informalize(formal: str, rng: np.random.Generator) -> str:
    """Apply the fixed informalization rule table to one formal sentence.

    Lowercase, drop terminal punctuation, map words through
    INFORMAL_WORD_MAP, and append a filler token with probability 0.3.
    The rng is always consulted for the filler draw, so consuming one
    sentence advances the stream by a fixed amount.
    """
    text = formal.lower()
    if text and text[-1] in _TERMINAL_PUNCT:
        text = text[:-1]
    words = [INFORMAL_WORD_MAP.get(w, w) for w in text.split()]
    if rng.random() < FILLER_PROB:
        words.append(FILLERS[int(rng.integers(len(FILLERS)))])
    return " ".join(words)


def draw_formal_sentences(rng: np.random.Generator, n: int, used: set | None = None) -> list[str]:
    """Draw n distinct formal sentences from the template grammar.

    Passing a shared `used` set keeps draws disjoint across multiple calls.
    """
    if n < 1:
        raise ContractViolation("n must be >= 1")
    if used is None:
        used = set()
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * n + 1000:
            raise ContractViolation("template space exhausted; lower n")
        ti = int(rng.integers(len(TEMPLATES)))
        values = {s: _SLOT_VALUES[s][int(rng.integers(len(_SLOT_VALUES[s])))] for s in _TEMPLATE_SLOTS[ti]}
        key = (ti, tuple(sorted(values.items())))
        if key in used:
            continue
        used.add(key)
        out.append(TEMPLATES[ti].format(**values))
    return out


def generate_synthetic_fst(seed: int, n: int) -> tuple[ParallelDataset, Corpus, Corpus]:
    """Generate a seeded synthetic benchmark: parallel pairs plus two
    monolingual corpora drawn from disjoint template instances.

    Returns (parallel informal->formal, formal monolingual, informal
    monolingual).
    """
    if n < 1:
        raise ContractViolation("n must be >= 1")
    rng = np.random.default_rng(seed)
    used: set = set()
    parallel_formal = draw_formal_sentences(rng, n, used)
    mono_formal = draw_formal_sentences(rng, n, used)
    mono_informal_src = draw_formal_sentences(rng, n, used)

    pairs = [
        ParallelPair(Sentence(informalize(f, rng)), Sentence(f), provenance="original")
        for f in parallel_formal
    ]
    formal_mono = Corpus([Sentence(f) for f in mono_formal], name="synthetic-formal")
    informal_mono = Corpus(
        [Sentence(informalize(f, rng)) for f in mono_informal_src], name="synthetic-informal"
    )
    dataset = ParallelDataset(
        pairs, metadata={"method": "synthetic", "seed": str(seed), "n": str(n)}
    )
    return dataset, formal_mono, informal_mono


_PARAPHRASE_HEADS = (
    ("Could you please ", "Could you kindly "),
    ("Please ", "Kindly "),
    ("I would like ", "I would prefer "),
    ("We are pleased to ", "We are glad to "),
    ("Thank you for ", "We thank you for "),
    ("I am happy to ", "I am glad to "),
    ("It is important to ", "It is essential to "),
    ("I believe ", "I think "),
    ("Would you be able to ", "Would you be willing to "),
)


def paraphrase_formal(formal: str) -> list[str]:
    """Produce up to two surface paraphrases of a formal sentence."""
    variants = []
    for head, alt in _PARAPHRASE_HEADS:
        if formal.startswith(head):
            variants.append(alt + formal[len(head):])
            break
    if " will " in formal:
        variants.append(formal.replace(" will ", " is going to ", 1))
    elif " has been " in formal:
        variants.append(formal.replace(" has been ", " was ", 1))
    return variants[:2]


def make_multiref(
    rng: np.random.Generator, n: int, used: set | None = None
) -> tuple[MultiRefTestSet, ParallelDataset]:
    """Build a test set of informal sources with 4 formal references each.

    References are the canonical formal rewrite plus surface paraphrases,
    padded by repeating the canonical form. Also returns the underlying
    canonical pairs for convenience.
    """
    formals = draw_formal_sentences(rng, n, used)
    items = []
    pairs = []
    for f in formals:
        informal = informalize(f, rng)
        refs = [f] + paraphrase_formal(f)
        while len(refs) < 4:
            refs.append(f)
        items.append((Sentence(informal), tuple(Sentence(r) for r in refs[:4])))
        pairs.append(ParallelPair(Sentence(informal), Sentence(f), provenance="original"))
    return MultiRefTestSet(items), ParallelDataset(pairs, metadata={"method": "synthetic-test"})


# Corruptions for synthetic GEC data: (matcher, corrupted form, edit type).
_GEC_SWAPS = (
    ("is", "are", "SVA"),
    ("are", "is", "SVA"),
    ("has", "have", "SVA"),
    ("to", "too", "WC"),
    ("the", "a", "ART"),
)


def make_synthetic_m2(rng: np.random.Generator, n: int, used: set | None = None) -> str:
    """Generate an M2 file: formal sentences with seeded grammar corruptions.

    Each block's source is the corrupted sentence and the annotator-0 edits
    restore the original formal sentence.
    """
    formals = draw_formal_sentences(rng, n, used)
    blocks = []
    for f in formals:
        tokens = f.split()
        candidates = []
        for i, tok in enumerate(tokens):
            for good, bad, etype in _GEC_SWAPS:
                if tok == good:
                    candidates.append((i, bad, tok, etype))
        lines = []
        if candidates:
            which = candidates[int(rng.integers(len(candidates)))]
            i, bad, good, etype = which
            corrupted = list(tokens)
            corrupted[i] = bad
            # Sometimes also duplicate a token to the right of the swap.
            extra = None
            if rng.random() < 0.25 and i + 2 < len(corrupted):
                j = i + 2
                corrupted.insert(j, corrupted[j])
                extra = (j, j + 1, "DUP", "")
            lines.append("S " + " ".join(corrupted))
            lines.append(f"A {i} {i + 1}|||{etype}|||{good}|||REQUIRED|||-NONE-|||0")
            if extra:
                s, e, t, rep = extra
                lines.append(f"A {s} {e}|||{t}|||{rep}|||REQUIRED|||-NONE-|||0")
        else:
            lines.append("S " + " ".join(tokens))
            lines.append("A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
