"""Sequence-to-sequence formality transfer model.

A single-layer GRU encoder-decoder with additive attention over a shared
BPE vocabulary. Teacher-forced training runs on the autodiff tape; greedy,
beam, and ensemble decoding run on a gradient-free numpy path. Beam
hypotheses are ranked by length-normalized mean log-probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bpe as bpe_mod
from .bpe import BOS_ID, EOS_ID, PAD_ID
from .errors import ContractViolation
from .neural import (
    AdamState,
    Tensor,
    adam_step,
    clip_global_norm,
    collect_grads,
    cross_entropy_logits,
    dropout,
    embedding_lookup,
    init_uniform,
    load_checkpoint,
    save_checkpoint,
    zero_grads,
)
from .neural.layers import attn_gru_decoder, gru_sequence
from .neural.tensor import matmul, reshape, select_time, tanh
from .textdata import ParallelPair, Sentence


@dataclass
class Seq2SeqConfig:
    embed_dim: int = 128
    hidden: int = 256
    attn_dim: int = 128
    max_len: int = 48
    dropout: float = 0.0
    clip_norm: float = 5.0
    seed: int = 0


@dataclass
class DecodeConfig:
    mode: str = "greedy"  # "greedy" | "beam"
    beam_width: int = 4
    max_len: int = 48
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("greedy", "beam"):
            raise ContractViolation(f"unknown decode mode {self.mode!r}")
        if self.beam_width < 1:
            raise ContractViolation("beam_width must be >= 1")
        if self.max_len < 1:
            raise ContractViolation("max_len must be >= 1")


@dataclass
class Seq2SeqModel:
    params: dict[str, Tensor]
    config: Seq2SeqConfig
    bpe: bpe_mod.BpeModel
    skipped_overlong: int = 0
    _encode_cache: dict[str, tuple[int, ...]] = field(default_factory=dict, repr=False)

    @property
    def vocab_size(self) -> int:
        return len(self.bpe)

    def encode_text(self, sentence: Sentence) -> tuple[int, ...]:
        ids = self._encode_cache.get(sentence.text)
        if ids is None:
            ids = tuple(bpe_mod.encode(self.bpe, sentence))
            self._encode_cache[sentence.text] = ids
        return ids


def new_seq2seq(bpe: bpe_mod.BpeModel, config: Seq2SeqConfig | None = None) -> Seq2SeqModel:
    cfg = config or Seq2SeqConfig()
    rng = np.random.default_rng(cfg.seed)
    V, E, H, A = len(bpe), cfg.embed_dim, cfg.hidden, cfg.attn_dim
    params = {
        "emb": init_uniform(rng, (V, E)),
        "enc_wx": init_uniform(rng, (E, 3 * H)),
        "enc_wh": init_uniform(rng, (H, 3 * H)),
        "enc_b": init_uniform(rng, (3 * H,)),
        "bridge_w": init_uniform(rng, (H, H)),
        "bridge_b": init_uniform(rng, (H,)),
        "dec_wx": init_uniform(rng, (E + H, 3 * H)),
        "dec_wh": init_uniform(rng, (H, 3 * H)),
        "dec_b": init_uniform(rng, (3 * H,)),
        "attn_wk": init_uniform(rng, (H, A)),
        "attn_wq": init_uniform(rng, (H, A)),
        "attn_v": init_uniform(rng, (A,)),
        "out_w": init_uniform(rng, (2 * H, V)),
        "out_b": init_uniform(rng, (V,)),
    }
    return Seq2SeqModel(params=params, config=cfg, bpe=bpe)


def _pad_batch(seqs: list[tuple[int, ...]]) -> tuple[np.ndarray, np.ndarray]:
    T = max(len(s) for s in seqs)
    ids = np.full((len(seqs), T), PAD_ID, dtype=np.int64)
    lengths = np.empty(len(seqs), dtype=np.int64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        lengths[i] = len(s)
    return ids, lengths


def _encode_tape(model: Seq2SeqModel, src_ids: np.ndarray, src_len: np.ndarray):
    """Run the encoder on the tape: returns (enc_out, keys_proj, dec_h0, mask)."""
    p = model.params
    B, Ts = src_ids.shape
    H = model.config.hidden
    emb = embedding_lookup(p["emb"], src_ids)  # (B, Ts, E)
    h0 = Tensor(np.zeros((B, H)))
    enc_out = gru_sequence(emb, h0, p["enc_wx"], p["enc_wh"], p["enc_b"])  # (B, Ts, H)
    final = select_time(enc_out, src_len - 1)
    dec_h0 = tanh(matmul(final, p["bridge_w"]) + p["bridge_b"])
    keys = reshape(matmul(reshape(enc_out, (B * Ts, H)), p["attn_wk"]), (B, Ts, -1))
    mask = (np.arange(Ts)[None, :] < src_len[:, None]).astype(np.float64)
    return enc_out, keys, dec_h0, mask


def batch_loss(
    model: Seq2SeqModel,
    batch: list[ParallelPair],
    rng: np.random.Generator | None = None,
):
    """Teacher-forced mean per-token loss for a batch, on the tape.

    Pairs whose encoded source or target exceeds config.max_len are skipped
    and counted on model.skipped_overlong.
    """
    if not batch:
        raise ContractViolation("training requires a non-empty batch")
    cfg = model.config
    usable = []
    for pair in batch:
        src = model.encode_text(pair.source)
        tgt = model.encode_text(pair.target)
        if len(src) > cfg.max_len or len(tgt) > cfg.max_len:
            model.skipped_overlong += 1
            continue
        usable.append((src, tgt))
    if not usable:
        raise ContractViolation("all pairs in the batch exceed max_len")

    p = model.params
    src_ids, src_len = _pad_batch([s for s, _ in usable])
    dec_in, _ = _pad_batch([(BOS_ID,) + t for _, t in usable])
    dec_tgt, _ = _pad_batch([t + (EOS_ID,) for _, t in usable])
    B, Tt = dec_in.shape

    enc_out, keys, h0, mask = _encode_tape(model, src_ids, src_len)
    emb_in = embedding_lookup(p["emb"], dec_in)  # (B, Tt, E)
    stacked = attn_gru_decoder(
        emb_in, h0, enc_out, keys, mask,
        p["dec_wx"], p["dec_wh"], p["dec_b"], p["attn_wq"], p["attn_v"],
    )  # (B, Tt, 2H)
    flat = reshape(stacked, (B * Tt, 2 * cfg.hidden))
    if cfg.dropout > 0:
        flat = dropout(flat, cfg.dropout, rng or np.random.default_rng(cfg.seed), train=True)
    logits = matmul(flat, p["out_w"]) + p["out_b"]
    labels = dec_tgt.reshape(-1)
    weights = (labels != PAD_ID).astype(np.float64)
    return cross_entropy_logits(logits, labels, weights)


def train_step(
    model: Seq2SeqModel,
    batch: list[ParallelPair],
    state: AdamState,
    lr: float,
    rng: np.random.Generator | None = None,
) -> float:
    """One teacher-forced gradient step; returns the mean per-token loss."""
    loss = batch_loss(model, batch, rng)
    loss.backward()
    grads = collect_grads(model.params)
    clip_global_norm(grads, model.config.clip_norm)
    adam_step(model.params, grads, state, lr)
    zero_grads(model.params)
    return loss.item()


# ---------------------------------------------------------------------------
# Decoding (gradient-free numpy path)
# ---------------------------------------------------------------------------


def _np(name: str, model: Seq2SeqModel) -> np.ndarray:
    return model.params[name].data


def _encode_np(model: Seq2SeqModel, ids: tuple[int, ...]):
    p = model.params
    H = model.config.hidden
    emb = _np("emb", model)[list(ids)]  # (T, E)
    wx, wh, b = _np("enc_wx", model), _np("enc_wh", model), _np("enc_b", model)
    h = np.zeros(H)
    states = np.empty((len(ids), H))
    for t in range(len(ids)):
        h = _gru_np(emb[t], h, wx, wh, b)
        states[t] = h
    dec_h0 = np.tanh(states[-1] @ _np("bridge_w", model) + _np("bridge_b", model))
    keys = states @ _np("attn_wk", model)  # (T, A)
    return states, keys, dec_h0


def _gru_np(x, h, wx, wh, b):
    Hn = h.shape[-1]
    gx = x @ wx + b
    gh = h @ wh
    z = 1.0 / (1.0 + np.exp(-(gx[..., :Hn] + gh[..., :Hn])))
    r = 1.0 / (1.0 + np.exp(-(gx[..., Hn : 2 * Hn] + gh[..., Hn : 2 * Hn])))
    n = np.tanh(gx[..., 2 * Hn :] + r * gh[..., 2 * Hn :])
    return (1.0 - z) * n + z * h


class _DecoderRun:
    """Step-wise decoder over one source for one or more models.

    Per-model encoder state is fixed once; step() advances all hidden
    states with one consumed token and returns the averaged next-token
    probability distribution.
    """

    def __init__(self, models: list[Seq2SeqModel], source: Sentence):
        vocabs = {tuple(sorted(m.bpe.vocab.items())) for m in models}
        if len(vocabs) != 1:
            raise ContractViolation("ensemble models must share one vocabulary")
        self.models = models
        self.enc = [_encode_np(m, m.encode_text(source)) for m in models]

    def initial_state(self) -> tuple[np.ndarray, ...]:
        return tuple(e[2] for e in self.enc)

    def step(self, state, token: int):
        next_state = []
        probs = None
        for m, (enc_states, keys, _), h in zip(self.models, self.enc, state):
            wq, v = _np("attn_wq", m), _np("attn_v", m)
            s = np.tanh(h @ wq + keys)  # (T, A)
            e = s @ v
            e -= e.max()
            alpha = np.exp(e)
            alpha /= alpha.sum()
            context = alpha @ enc_states
            x = np.concatenate([_np("emb", m)[token], context])
            h2 = _gru_np(x, h, _np("dec_wx", m), _np("dec_wh", m), _np("dec_b", m))
            logits = np.concatenate([h2, context]) @ _np("out_w", m) + _np("out_b", m)
            logits -= logits.max()
            pr = np.exp(logits)
            pr /= pr.sum()
            probs = pr if probs is None else probs + pr
            next_state.append(h2)
        return tuple(next_state), probs / len(self.models)


def _greedy_ids(run: _DecoderRun, max_len: int) -> tuple[list[int], float]:
    state = run.initial_state()
    token = BOS_ID
    out: list[int] = []
    logprob = 0.0
    for _ in range(max_len):
        state, probs = run.step(state, token)
        token = int(probs.argmax())
        logprob += float(np.log(probs[token]))
        if token == EOS_ID:
            out.append(token)
            break
        out.append(token)
    return out, logprob


def _norm_score(ids: list[int], logprob: float) -> float:
    return logprob / max(len(ids), 1)


def _beam_ids(run: _DecoderRun, width: int, max_len: int) -> list[int]:
    # hypotheses: (ids, state, sum_logprob, finished)
    alive = [([], run.initial_state(), 0.0, False)]
    finished: list[tuple[list[int], float]] = []
    for _ in range(max_len):
        candidates = []
        for ids, state, lp, _ in alive:
            token_in = ids[-1] if ids else BOS_ID
            state2, probs = run.step(state, token_in)
            order = np.argsort(-probs, kind="stable")[:width]
            for tok in order:
                candidates.append((ids + [int(tok)], state2, lp + float(np.log(probs[tok]))))
        candidates.sort(key=lambda c: -c[2])
        alive = []
        for ids, state, lp in candidates:
            if ids[-1] == EOS_ID:
                finished.append((ids, lp))
            elif len(alive) < width:
                alive.append((ids, state, lp, False))
            if len(alive) >= width and len(finished) >= width:
                break
        if not alive:
            break
    pool = finished + [(ids, lp) for ids, state, lp, _ in alive]
    # The greedy path is always a candidate so the returned hypothesis never
    # scores below it under the beam's own objective.
    pool.append(_greedy_ids(run, max_len))
    best = max(pool, key=lambda c: _norm_score(c[0], c[1]))
    return best[0]


def _ids_to_sentence(model: Seq2SeqModel, ids: list[int]) -> Sentence:
    return bpe_mod.decode(model.bpe, [i for i in ids if i != EOS_ID])


def decode(model: Seq2SeqModel, source: Sentence, config: DecodeConfig | None = None) -> Sentence:
    return ensemble_decode([model], source, config)


def ensemble_decode(
    models: list[Seq2SeqModel], source: Sentence, config: DecodeConfig | None = None
) -> Sentence:
    """Decode with per-step probability averaging across the models."""
    if not models:
        raise ContractViolation("ensemble_decode requires at least one model")
    cfg = config or DecodeConfig()
    run = _DecoderRun(models, source)
    if cfg.mode == "greedy":
        ids, _ = _greedy_ids(run, cfg.max_len)
    else:
        ids = _beam_ids(run, cfg.beam_width, cfg.max_len)
    return _ids_to_sentence(models[0], ids)


def step_distributions(models: list[Seq2SeqModel], source: Sentence, tokens: list[int]):
    """Averaged next-token distributions along a forced token path."""
    run = _DecoderRun(models, source)
    state = run.initial_state()
    out = []
    prev = BOS_ID
    for tok in tokens + [None]:
        state, probs = run.step(state, prev)
        out.append(probs)
        if tok is None:
            break
        prev = tok
    return out


def save_seq2seq(model: Seq2SeqModel, path) -> None:
    meta = {
        "kind": "seq2seq",
        "config": {
            "embed_dim": model.config.embed_dim,
            "hidden": model.config.hidden,
            "attn_dim": model.config.attn_dim,
            "max_len": model.config.max_len,
            "dropout": model.config.dropout,
            "clip_norm": model.config.clip_norm,
            "seed": model.config.seed,
        },
        "bpe": bpe_mod.bpe_to_dict(model.bpe),
    }
    save_checkpoint(path, model.params, meta)


def load_seq2seq(path) -> Seq2SeqModel:
    params, meta = load_checkpoint(path)
    if meta.get("kind") != "seq2seq":
        raise ContractViolation(f"not a seq2seq checkpoint: {meta.get('kind')!r}")
    return Seq2SeqModel(
        params=params,
        config=Seq2SeqConfig(**meta["config"]),
        bpe=bpe_mod.bpe_from_dict(meta["bpe"]),
    )
