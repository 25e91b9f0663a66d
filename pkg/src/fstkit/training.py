"""Training-regime controller: pre-train & fine-tune (PT&FT) vs simultaneous
training (ST).

PT&FT trains on augmented data under the warmup/inverse-sqrt schedule, then
fine-tunes on original data only at a constant rate with fresh optimizer
moments. ST trains once on the balanced union for the same total steps so
the comparison is step-for-step fair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractViolation
from .evaluation import corpus_bleu
from .neural import AdamState, LrSchedule, lr_at
from .seq2seq import DecodeConfig, Seq2SeqModel, decode, save_seq2seq, train_step
from .textdata import MultiRefTestSet, ParallelDataset, balance


@dataclass
class TrainingRegime:
    kind: str = "ptft"  # "ptft" | "st"
    pretrain_steps: int = 3000
    finetune_steps: int = 1000
    pretrain_schedule: LrSchedule = field(default_factory=lambda: LrSchedule(0.0005, 200))
    finetune_lr: float = 0.00025
    st_balance: str = "none"
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("ptft", "st"):
            raise ContractViolation(f"unknown regime kind {self.kind!r}")
        if self.pretrain_steps < 1 or self.finetune_steps < 1:
            raise ContractViolation("step counts must be >= 1")


@dataclass
class TrainLogEntry:
    phase: str
    step: int
    lr: float
    loss: float


@dataclass
class TrainLog:
    entries: list[TrainLogEntry] = field(default_factory=list)
    checkpoints: dict[str, str] = field(default_factory=dict)
    bleu: dict[str, float] = field(default_factory=dict)


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start : start + batch_size]


def _run_phase(
    model: Seq2SeqModel,
    dataset: ParallelDataset,
    steps: int,
    lr_fn,
    batch_size: int,
    rng: np.random.Generator,
    phase: str,
    log: TrainLog,
    state: AdamState,
    allowed_provenance: set[str] | None = None,
) -> None:
    if not dataset.pairs:
        raise ContractViolation(f"phase {phase!r} has no training data")
    cap = model.config.max_len
    pairs = []
    for p in dataset.pairs:
        if len(model.encode_text(p.source)) > cap or len(model.encode_text(p.target)) > cap:
            model.skipped_overlong += 1
        else:
            pairs.append(p)
    if not pairs:
        raise ContractViolation(
            f"phase {phase!r} has no training data within max_len {cap}"
        )
    step = 0
    while step < steps:
        for batch_idx in _epoch_batches(len(pairs), batch_size, rng):
            step += 1
            batch = [pairs[i] for i in batch_idx]
            if allowed_provenance is not None:
                bad = {p.provenance for p in batch} - allowed_provenance
                if bad:
                    raise ContractViolation(
                        f"phase {phase!r} sampled provenance {sorted(bad)}"
                    )
            lr = lr_fn(step)
            loss = train_step(model, batch, state, lr)
            log.entries.append(TrainLogEntry(phase=phase, step=step, lr=lr, loss=loss))
            if step >= steps:
                break


def evaluate_bleu(model: Seq2SeqModel, eval_set: MultiRefTestSet, max_len: int | None = None) -> float:
    cfg = DecodeConfig(mode="greedy", max_len=max_len or model.config.max_len)
    hyps = [decode(model, src, cfg) for src, _ in eval_set.items]
    refs = [list(ref_set) for _, ref_set in eval_set.items]
    return corpus_bleu(hyps, refs).score


def run_ptft(
    model: Seq2SeqModel,
    augmented: ParallelDataset,
    original: ParallelDataset,
    regime: TrainingRegime,
    eval_set: MultiRefTestSet | None = None,
    out_dir=None,
) -> tuple[Seq2SeqModel, TrainLog]:
    """Pre-train on augmented data, then fine-tune on the original data only.

    Fine-tuning starts from fresh Adam moments and a constant learning rate;
    a provenance check on every batch guarantees no augmented pair is seen
    after the phase switch. Checkpoints are written at both phase ends when
    out_dir is given.
    """
    if not original.pairs:
        raise ContractViolation("PT&FT requires a non-empty original dataset")
    if not augmented.pairs:
        raise ContractViolation("PT&FT requires a non-empty augmented dataset")
    log = TrainLog()
    rng = np.random.default_rng(regime.seed)
    _run_phase(
        model, augmented, regime.pretrain_steps,
        lambda step: lr_at(regime.pretrain_schedule, step),
        regime.batch_size, rng, "pretrain", log, AdamState(),
    )
    if out_dir is not None:
        path = Path(out_dir) / "pretrained.json"
        save_seq2seq(model, path)
        log.checkpoints["pretrain"] = str(path)
    if eval_set is not None:
        log.bleu["pretrain"] = evaluate_bleu(model, eval_set)

    _run_phase(
        model, original, regime.finetune_steps,
        lambda step: regime.finetune_lr,
        regime.batch_size, rng, "finetune", log, AdamState(),
        allowed_provenance={"original"},
    )
    if out_dir is not None:
        path = Path(out_dir) / "finetuned.json"
        save_seq2seq(model, path)
        log.checkpoints["finetune"] = str(path)
    if eval_set is not None:
        log.bleu["finetune"] = evaluate_bleu(model, eval_set)
    return model, log


def run_st(
    model: Seq2SeqModel,
    augmented: ParallelDataset,
    original: ParallelDataset,
    regime: TrainingRegime,
    eval_set: MultiRefTestSet | None = None,
    out_dir=None,
) -> tuple[Seq2SeqModel, TrainLog]:
    """Simultaneous training on the balanced union of original and augmented
    data for pretrain_steps + finetune_steps, matching PT&FT's step budget."""
    data = balance(original, augmented, regime.st_balance, regime.seed)
    total = regime.pretrain_steps + regime.finetune_steps
    log = TrainLog()
    rng = np.random.default_rng(regime.seed)
    _run_phase(
        model, data, total,
        lambda step: lr_at(regime.pretrain_schedule, step),
        regime.batch_size, rng, "st", log, AdamState(),
    )
    if out_dir is not None:
        path = Path(out_dir) / "st.json"
        save_seq2seq(model, path)
        log.checkpoints["st"] = str(path)
    if eval_set is not None:
        log.bleu["st"] = evaluate_bleu(model, eval_set)
    return model, log


def train_on_dataset(
    model: Seq2SeqModel,
    dataset: ParallelDataset,
    steps: int,
    schedule: LrSchedule,
    seed: int = 0,
    batch_size: int = 32,
) -> list[float]:
    """Plain seeded training loop used by single-dataset consumers."""
    log = TrainLog()
    rng = np.random.default_rng(seed)
    _run_phase(
        model, dataset, steps,
        lambda step: lr_at(schedule, step),
        batch_size, rng, "train", log, AdamState(),
    )
    return [e.loss for e in log.entries]
