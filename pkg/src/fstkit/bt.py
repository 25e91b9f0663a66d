"""Back translation: synthesize informal sources for formal monolingual text.

A formal-to-informal model is trained by swapping the original parallel
data, discriminator-selected formal sentences are decoded through it, and
each (generated informal, formal input) pair joins the augmented data in
the informal-to-formal task direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .discriminator import DiscriminatorModel, score_formality
from .errors import ContractViolation
from .neural import LrSchedule
from .seq2seq import DecodeConfig, Seq2SeqModel, decode
from .textdata import Corpus, ParallelDataset, ParallelPair


@dataclass
class BtConfig:
    formal_threshold: float = 0.9
    decode: DecodeConfig = field(default_factory=lambda: DecodeConfig(mode="greedy"))
    seed: int = 0
    train_steps: int = 1500
    batch_size: int = 24
    schedule: LrSchedule = field(default_factory=lambda: LrSchedule(0.004, 200))

    def __post_init__(self):
        if not (0.0 <= self.formal_threshold <= 1.0):
            raise ContractViolation(
                f"formal_threshold {self.formal_threshold} outside [0, 1]"
            )


def select_formal(corpus: Corpus, model: DiscriminatorModel, threshold: float) -> Corpus:
    """Keep sentences the discriminator scores at or above the threshold."""
    if not (0.0 <= threshold <= 1.0):
        raise ContractViolation(f"threshold {threshold} outside [0, 1]")
    kept = [s for s in corpus.sentences if score_formality(model, s) >= threshold]
    return Corpus(kept, name=corpus.name)


def train_bt_model(parallel: ParallelDataset, model: Seq2SeqModel, config: BtConfig):
    """Train the reverse (formal -> informal) model on swapped pairs.

    `parallel` must be in the original informal -> formal orientation; the
    swap happens here. Returns (model, per-step losses).
    """
    from .training import train_on_dataset

    if not parallel.pairs:
        raise ContractViolation("cannot train a BT model on an empty dataset")
    swapped = ParallelDataset(
        [ParallelPair(p.target, p.source, provenance="original") for p in parallel.pairs],
        metadata={"method": "bt-reverse", **parallel.metadata},
    )
    losses = train_on_dataset(
        model,
        swapped,
        steps=config.train_steps,
        schedule=config.schedule,
        seed=config.seed,
        batch_size=config.batch_size,
    )
    return model, losses


def generate_bt_pairs(
    model: Seq2SeqModel, formal: Corpus, config: BtConfig | None = None
) -> ParallelDataset:
    """Decode each formal sentence to a synthetic informal source.

    Emitted pairs put the generated informal text on the source side and the
    true formal input on the target side; identity generations are dropped.
    """
    cfg = config or BtConfig()
    pairs = []
    dropped_identity = 0
    for sentence in formal.sentences:
        generated = decode(model, sentence, cfg.decode)
        if generated.text == sentence.text:
            dropped_identity += 1
            continue
        pairs.append(ParallelPair(generated, sentence, provenance="bt"))
    return ParallelDataset(
        pairs,
        metadata={
            "method": "bt",
            "inputs": str(len(formal.sentences)),
            "dropped_identity": str(dropped_identity),
        },
    )
