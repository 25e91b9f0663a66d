"""Byte-pair-encoding subword model, learned jointly over source and target text.

Words are split into characters plus a separate end-of-word marker; the most
frequent adjacent symbol pair is merged repeatedly. Ties break on the
lexicographically smaller (left, right) pair so learning is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ContractViolation
from .textdata import Corpus, Sentence

END_OF_WORD = "⟨/w⟩"  # ⟨/w⟩
UNK_MARKER = "⟨unk⟩"  # ⟨unk⟩, visible stand-in emitted by decode

PAD_ID = 0
UNK_ID = 1
BOS_ID = 2
EOS_ID = 3
SPECIALS = ("<pad>", "<unk>", "<bos>", "<eos>")


@dataclass
class BpeModel:
    merges: list[tuple[str, str]]
    vocab: dict[str, int]
    inverse_vocab: dict[int, str] = field(init=False)
    _ranks: dict[tuple[str, str], int] = field(init=False)
    _word_cache: dict[str, tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        self.inverse_vocab = {i: t for t, i in self.vocab.items()}
        if len(self.inverse_vocab) != len(self.vocab):
            raise ContractViolation("vocab mapping is not bijective")
        self._ranks = {pair: i for i, pair in enumerate(self.merges)}
        self._word_cache = {}

    def __len__(self) -> int:
        return len(self.vocab)


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word) + (END_OF_WORD,)


def _pair_counts(word_freqs: dict[tuple[str, ...], int]) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for symbols, freq in word_freqs.items():
        for a, b in zip(symbols, symbols[1:]):
            counts[(a, b)] = counts.get((a, b), 0) + freq
    return counts


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    merged = pair[0] + pair[1]
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def learn_bpe(corpora: list[Corpus], merge_count: int) -> BpeModel:
    """Learn a BPE model over whitespace words of the given corpora.

    Stops after merge_count merges or once no adjacent pair occurs at least
    twice.
    """
    if merge_count < 0:
        raise ContractViolation("merge_count must be >= 0")
    word_freqs: dict[tuple[str, ...], int] = {}
    charset: set[str] = set()
    n_words = 0
    for corpus in corpora:
        for sentence in corpus.sentences:
            for word in sentence.tokens():
                n_words += 1
                charset.update(word)
                key = _word_symbols(word)
                word_freqs[key] = word_freqs.get(key, 0) + 1
    if n_words == 0:
        raise ContractViolation("cannot learn BPE from empty corpora")

    merges: list[tuple[str, str]] = []
    for _ in range(merge_count):
        counts = _pair_counts(word_freqs)
        if not counts:
            break
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] < 2:
            break
        pair = best[0]
        merges.append(pair)
        word_freqs = {_merge_word(sym, pair): f for sym, f in word_freqs.items()}

    vocab: dict[str, int] = {tok: i for i, tok in enumerate(SPECIALS)}
    for ch in sorted(charset) + [END_OF_WORD]:
        if ch not in vocab:
            vocab[ch] = len(vocab)
    for left, right in merges:
        tok = left + right
        if tok not in vocab:
            vocab[tok] = len(vocab)
    return BpeModel(merges=merges, vocab=vocab)


def _encode_word(model: BpeModel, word: str) -> tuple[int, ...]:
    cached = model._word_cache.get(word)
    if cached is not None:
        return cached
    symbols = list(_word_symbols(word))
    for pair in model.merges:
        if len(symbols) < 2:
            break
        if pair[0] in symbols:
            symbols = list(_merge_word(tuple(symbols), pair))
    ids = tuple(model.vocab.get(s, UNK_ID) for s in symbols)
    model._word_cache[word] = ids
    return ids


def encode(model: BpeModel, sentence: Sentence) -> list[int]:
    """Encode to subword ids; characters unseen at training time become unk."""
    ids: list[int] = []
    for word in sentence.tokens():
        ids.extend(_encode_word(model, word))
    return ids


def decode(model: BpeModel, ids: list[int]) -> Sentence:
    """Invert encode. Unk ids decode to a visible marker so decode is total."""
    words: list[str] = []
    current: list[str] = []
    for i in ids:
        if i in (PAD_ID, BOS_ID, EOS_ID):
            continue
        tok = model.inverse_vocab.get(int(i))
        if tok is None:
            raise ContractViolation(f"id {i} not in vocabulary")
        if tok == SPECIALS[UNK_ID]:
            tok = UNK_MARKER
        if tok.endswith(END_OF_WORD):
            current.append(tok[: -len(END_OF_WORD)])
            words.append("".join(current))
            current = []
        else:
            current.append(tok)
    if current:
        words.append("".join(current))
    return Sentence(" ".join(w for w in words if w) or UNK_MARKER)


def save_bpe(model: BpeModel, path) -> None:
    payload = {
        "version": 1,
        "merges": [[a, b] for a, b in model.merges],
        "vocab": model.vocab,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8")


def load_bpe(path) -> BpeModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != 1:
        raise ContractViolation(f"unsupported BPE model version {payload.get('version')!r}")
    return BpeModel(
        merges=[tuple(m) for m in payload["merges"]],
        vocab={k: int(v) for k, v in payload["vocab"].items()},
    )


def bpe_to_dict(model: BpeModel) -> dict:
    return {"merges": [[a, b] for a, b in model.merges], "vocab": dict(model.vocab)}


def bpe_from_dict(payload: dict) -> BpeModel:
    return BpeModel(
        merges=[tuple(m) for m in payload["merges"]],
        vocab={k: int(v) for k, v in payload["vocab"].items()},
    )
