"""CNN sentence-formality classifier.

Produces the probability that a sentence is formal as the second component
of a 2-way softmax over pooled convolutional features (filter widths 3/4/5,
100 maps each, dropout 0.5 before the classification head).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bpe as bpe_mod
from .errors import ContractViolation
from .neural import (
    AdamState,
    Tensor,
    adam_step,
    clip_global_norm,
    collect_grads,
    cross_entropy_logits,
    dense,
    dropout,
    embedding_lookup,
    init_uniform,
    load_checkpoint,
    max_pool_over_time,
    save_checkpoint,
    zero_grads,
)
from .neural.layers import conv1d
from .neural.tensor import concat, tanh
from .textdata import Corpus, Sentence

INFORMAL, FORMAL = 0, 1


@dataclass
class DiscriminatorConfig:
    embed_dim: int = 64
    widths: tuple[int, ...] = (3, 4, 5)
    maps_per_width: int = 100
    dropout: float = 0.5
    epochs: int = 10
    batch_size: int = 32
    lr: float = 3e-3
    seed: int = 0
    holdout_fraction: float = 0.1
    clip_norm: float = 5.0
    tokenizer: str = "bpe"  # "bpe" | "words"
    early_stop_patience: int | None = None


class WordVocab:
    """Whitespace-word fallback tokenizer (flag alternative to shared BPE)."""

    def __init__(self, word_to_id: dict[str, int]):
        self.word_to_id = word_to_id

    @classmethod
    def build(cls, sentences) -> "WordVocab":
        vocab = {"<unk>": 0}
        for s in sentences:
            for w in s.tokens():
                if w not in vocab:
                    vocab[w] = len(vocab)
        return cls(vocab)

    def encode(self, sentence: Sentence) -> list[int]:
        return [self.word_to_id.get(w, 0) for w in sentence.tokens()]

    def __len__(self) -> int:
        return len(self.word_to_id)


@dataclass
class DiscriminatorModel:
    params: dict[str, Tensor]
    config: DiscriminatorConfig
    bpe: bpe_mod.BpeModel | None
    word_vocab: WordVocab | None = None
    train_log: list[dict] = field(default_factory=list)

    def encode(self, sentence: Sentence) -> list[int]:
        if self.config.tokenizer == "bpe":
            return bpe_mod.encode(self.bpe, sentence)
        return self.word_vocab.encode(sentence)

    @property
    def vocab_size(self) -> int:
        return len(self.bpe) if self.config.tokenizer == "bpe" else len(self.word_vocab)


def _init_params(rng: np.random.Generator, vocab_size: int, cfg: DiscriminatorConfig):
    params = {"emb": init_uniform(rng, (vocab_size, cfg.embed_dim))}
    for w in cfg.widths:
        params[f"conv{w}_w"] = init_uniform(rng, (w, cfg.embed_dim, cfg.maps_per_width))
        params[f"conv{w}_b"] = init_uniform(rng, (cfg.maps_per_width,))
    feat = cfg.maps_per_width * len(cfg.widths)
    params["head_w"] = init_uniform(rng, (feat, 2))
    params["head_b"] = init_uniform(rng, (2,))
    return params


def _forward(model: DiscriminatorModel, ids_batch: np.ndarray, train: bool, rng) -> Tensor:
    """ids_batch (B, T) of equal-length sequences -> logits (B, 2)."""
    cfg = model.config
    emb = embedding_lookup(model.params["emb"], ids_batch)
    pooled = []
    for w in cfg.widths:
        feat = conv1d(emb, model.params[f"conv{w}_w"], model.params[f"conv{w}_b"])
        pooled.append(max_pool_over_time(tanh(feat)))
    features = concat(pooled, axis=-1)
    features = dropout(features, cfg.dropout, rng, train=train)
    return dense(features, model.params["head_w"], model.params["head_b"])


def _group_by_length(encoded: list[list[int]], indices) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = {}
    for i in indices:
        groups.setdefault(len(encoded[i]), []).append(i)
    return groups


def _batch_logits(model, encoded, indices):
    """Score a set of sentences one forward pass each.

    Scoring never batches rows together: GEMM kernels pick different
    summation orders for different shapes, and scoring results are
    contractually identical whether sentences arrive alone or in a batch.
    """
    out = np.empty((len(indices), 2))
    for k, i in enumerate(indices):
        ids = np.array([encoded[i]], dtype=np.int64)
        out[k] = _forward(model, ids, False, None).data[0]
    return out


def train_discriminator(
    labeled: list[tuple[Sentence, int]],
    config: DiscriminatorConfig | None = None,
    bpe: bpe_mod.BpeModel | None = None,
) -> DiscriminatorModel:
    """Train on (sentence, label) pairs; label 1 means formal.

    Requires both classes in the data. Logs per-epoch mean loss and held-out
    accuracy on a seeded split.
    """
    cfg = config or DiscriminatorConfig()
    labels_present = {label for _, label in labeled}
    if labels_present != {INFORMAL, FORMAL}:
        raise ContractViolation(f"training data must contain both classes, got {labels_present}")

    word_vocab = None
    if cfg.tokenizer == "bpe":
        if bpe is None:
            corpus = Corpus([s for s, _ in labeled])
            bpe = bpe_mod.learn_bpe([corpus], 400)
        vocab_size = len(bpe)
    elif cfg.tokenizer == "words":
        word_vocab = WordVocab.build([s for s, _ in labeled])
        vocab_size = len(word_vocab)
    else:
        raise ContractViolation(f"unknown tokenizer {cfg.tokenizer!r}")

    rng = np.random.default_rng(cfg.seed)
    model = DiscriminatorModel(
        params=_init_params(rng, vocab_size, cfg), config=cfg, bpe=bpe, word_vocab=word_vocab
    )
    encoded = [model.encode(s) for s, _ in labeled]
    labels = np.array([label for _, label in labeled], dtype=np.int64)

    order = rng.permutation(len(labeled))
    n_hold = int(len(labeled) * cfg.holdout_fraction)
    hold_idx = order[:n_hold]
    train_idx = order[n_hold:]
    if len(train_idx) == 0:
        raise ContractViolation("no training examples left after holdout split")

    state = AdamState()
    best_acc, since_best = -1.0, 0
    for epoch in range(cfg.epochs):
        perm = rng.permutation(len(train_idx))
        losses = []
        for start in range(0, len(perm), cfg.batch_size):
            batch = [train_idx[i] for i in perm[start : start + cfg.batch_size]]
            total = None
            for length, group in _group_by_length(encoded, batch).items():
                ids = np.array([encoded[i] for i in group], dtype=np.int64)
                logits = _forward(model, ids, True, rng)
                part = cross_entropy_logits(logits, labels[group]) * (len(group) / len(batch))
                total = part if total is None else total + part
            total.backward()
            losses.append(total.item())
            grads = collect_grads(model.params)
            clip_global_norm(grads, cfg.clip_norm)
            adam_step(model.params, grads, state, cfg.lr)
            zero_grads(model.params)
        acc = None
        if len(hold_idx):
            preds = _batch_logits(model, encoded, list(hold_idx)).argmax(axis=1)
            acc = float((preds == labels[hold_idx]).mean())
        model.train_log.append(
            {"epoch": epoch, "loss": float(np.mean(losses)), "holdout_accuracy": acc}
        )
        if cfg.early_stop_patience is not None and acc is not None:
            if acc > best_acc:
                best_acc, since_best = acc, 0
            else:
                since_best += 1
                if since_best >= cfg.early_stop_patience:
                    break
    return model


def _softmax_row(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - logits.max())
    return e / e.sum()


def score_formality(model: DiscriminatorModel, sentence: Sentence) -> float:
    """P(formal) for one sentence; deterministic (no dropout at inference)."""
    if not isinstance(sentence, Sentence):
        raise ContractViolation("score_formality expects a Sentence")
    ids = np.array([model.encode(sentence)], dtype=np.int64)
    logits = _forward(model, ids, False, None)
    return float(_softmax_row(logits.data[0])[FORMAL])


def score_corpus(model: DiscriminatorModel, sentences) -> list[float]:
    """Batch scoring; grouped by length so results equal per-sentence scoring."""
    sentences = list(sentences)
    encoded = [model.encode(s) for s in sentences]
    logits = _batch_logits(model, encoded, list(range(len(sentences))))
    return [float(_softmax_row(row)[FORMAL]) for row in logits]


def evaluate_accuracy(model: DiscriminatorModel, labeled) -> float:
    labeled = list(labeled)
    scores = score_corpus(model, [s for s, _ in labeled])
    preds = [FORMAL if p >= 0.5 else INFORMAL for p in scores]
    return float(np.mean([p == label for p, (_, label) in zip(preds, labeled)]))


def save_discriminator(model: DiscriminatorModel, path) -> None:
    meta = {
        "kind": "discriminator",
        "config": {
            **{k: getattr(model.config, k) for k in (
                "embed_dim", "maps_per_width", "dropout", "epochs", "batch_size",
                "lr", "seed", "holdout_fraction", "clip_norm", "tokenizer",
            )},
            "widths": list(model.config.widths),
        },
        "tokenizer": (
            bpe_mod.bpe_to_dict(model.bpe)
            if model.config.tokenizer == "bpe"
            else model.word_vocab.word_to_id
        ),
    }
    save_checkpoint(path, model.params, meta)


def load_discriminator(path) -> DiscriminatorModel:
    params, meta = load_checkpoint(path)
    if meta.get("kind") != "discriminator":
        raise ContractViolation(f"not a discriminator checkpoint: {meta.get('kind')!r}")
    raw = dict(meta["config"])
    raw["widths"] = tuple(raw["widths"])
    cfg = DiscriminatorConfig(**raw)
    if cfg.tokenizer == "bpe":
        return DiscriminatorModel(params, cfg, bpe_mod.bpe_from_dict(meta["tokenizer"]))
    return DiscriminatorModel(params, cfg, None, WordVocab(dict(meta["tokenizer"])))
