"""Desk-scale experiment recipes.

Assembles the synthetic benchmark (original parallel data, monolingual
corpora, discriminator, BT / F-Dis / M-Task augmentation) and reruns the
training-regime comparisons at desk scale: regime table, per-source
augmentation table, pivot-strength table, and the human-evaluation batch.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bpe import BpeModel, learn_bpe
from .bt import BtConfig, generate_bt_pairs, select_formal, train_bt_model
from .discriminator import DiscriminatorConfig, DiscriminatorModel, train_discriminator
from .errors import ContractViolation
from .evaluation import build_humaneval_batch, save_items, save_key
from .fdis import FdisConfig, filter_by_formality, make_provider, pivot_report, round_trip
from .mtask import mtask_pairs
from .neural import LrSchedule
from .seq2seq import DecodeConfig, Seq2SeqConfig, decode, ensemble_decode, new_seq2seq
from .textdata import (
    Corpus,
    MultiRefTestSet,
    ParallelDataset,
    Sentence,
    draw_formal_sentences,
    informalize,
    make_multiref,
    make_synthetic_m2,
    parse_m2,
    ParallelPair,
)
from .training import TrainingRegime, evaluate_bleu, run_ptft, run_st, train_on_dataset

MOCK_PIVOTS = ("mock-strong", "mock-medium", "mock-weak")


@dataclass
class DeskBenchConfig:
    seed: int = 0
    n_original: int = 1000
    n_formal_mono: int = 2500
    n_informal_mono: int = 2200
    n_gec: int = 1500
    n_test: int = 200
    merges: int = 700
    embed_dim: int = 40
    hidden: int = 80
    attn_dim: int = 32
    max_len: int = 44
    batch_size: int = 24
    pretrain_steps: int = 3000
    finetune_steps: int = 1000
    base_lr: float = 0.004
    warmup: int = 200
    finetune_lr: float = 0.002
    sigma: float = 0.6
    formal_threshold: float = 0.9
    bt_steps: int = 1500
    disc_embed_dim: int = 32
    disc_maps: int = 32
    disc_epochs: int = 10
    seeds: tuple[int, ...] = (0, 1, 2)
    workers: int = 1
    include_augmented_only: bool = True


@dataclass
class DeskBench:
    config: DeskBenchConfig
    bpe: BpeModel
    original: ParallelDataset
    test_set: MultiRefTestSet
    discriminator: DiscriminatorModel
    bt_data: ParallelDataset
    fdis_by_pivot: dict[str, ParallelDataset]
    fdis_data: ParallelDataset
    mtask_data: ParallelDataset

    @property
    def augmented_all(self) -> ParallelDataset:
        pairs = list(self.bt_data.pairs) + list(self.fdis_data.pairs) + list(self.mtask_data.pairs)
        return ParallelDataset(pairs, metadata={"method": "bt+fdis+mtask"})

    def augmented_for(self, sources: tuple[str, ...]) -> ParallelDataset:
        chosen = {
            "bt": self.bt_data,
            "fdis": self.fdis_data,
            "mtask": self.mtask_data,
        }
        pairs = []
        for name in sources:
            if name not in chosen:
                raise ContractViolation(f"unknown augmentation source {name!r}")
            pairs.extend(chosen[name].pairs)
        return ParallelDataset(pairs, metadata={"method": "+".join(sources)})


def _limit_blas_threads():
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=1)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, "1")


def build_desk_benchmark(cfg: DeskBenchConfig | None = None) -> DeskBench:
    """Generate all datasets and models the table recipes share.

    Every artifact derives from cfg.seed; repeated builds are identical.
    """
    cfg = cfg or DeskBenchConfig()
    _limit_blas_threads()
    rng = np.random.default_rng(cfg.seed)
    used: set = set()

    original_formals = draw_formal_sentences(rng, cfg.n_original, used)
    original = ParallelDataset(
        [
            ParallelPair(Sentence(informalize(f, rng)), Sentence(f), provenance="original")
            for f in original_formals
        ],
        metadata={"method": "synthetic-original", "seed": str(cfg.seed)},
    )
    formal_mono = Corpus(
        [Sentence(f) for f in draw_formal_sentences(rng, cfg.n_formal_mono, used)],
        name="formal-mono",
    )
    informal_mono = Corpus(
        [
            Sentence(informalize(f, rng))
            for f in draw_formal_sentences(rng, cfg.n_informal_mono, used)
        ],
        name="informal-mono",
    )
    gec_m2 = make_synthetic_m2(rng, cfg.n_gec, used)
    test_set, _ = make_multiref(rng, cfg.n_test, used)

    bpe = learn_bpe(
        [
            Corpus([p.source for p in original.pairs]),
            Corpus([p.target for p in original.pairs]),
        ],
        cfg.merges,
    )

    labeled = [(p.source, 0) for p in original.pairs] + [(p.target, 1) for p in original.pairs]
    disc = train_discriminator(
        labeled,
        DiscriminatorConfig(
            embed_dim=cfg.disc_embed_dim,
            maps_per_width=cfg.disc_maps,
            epochs=cfg.disc_epochs,
            seed=cfg.seed,
        ),
        bpe=bpe,
    )

    # back translation: formal -> informal model over swapped original data
    bt_cfg = BtConfig(
        formal_threshold=cfg.formal_threshold,
        decode=DecodeConfig(mode="greedy", max_len=cfg.max_len),
        seed=cfg.seed,
        train_steps=cfg.bt_steps,
        batch_size=cfg.batch_size,
        schedule=LrSchedule(cfg.base_lr, cfg.warmup),
    )
    bt_model = new_seq2seq(bpe, _model_config(cfg, seed=cfg.seed + 101))
    bt_model, _ = train_bt_model(original, bt_model, bt_cfg)
    selected = select_formal(formal_mono, disc, cfg.formal_threshold)
    bt_data = generate_bt_pairs(bt_model, selected, bt_cfg)

    fdis_by_pivot = {}
    for pivot in MOCK_PIVOTS:
        provider = make_provider(pivot)
        pairs, _ = round_trip(provider, informal_mono, pivot, FdisConfig(sigma=cfg.sigma))
        fdis_by_pivot[pivot] = filter_by_formality(pairs, disc, cfg.sigma, pivot=pivot)
    fdis_data = ParallelDataset(
        [p for pivot in MOCK_PIVOTS for p in fdis_by_pivot[pivot].pairs],
        metadata={"method": "fdis-combined"},
    )

    mtask_data = mtask_pairs(parse_m2(gec_m2), annotators="all", source_files=["synthetic-gec"])

    return DeskBench(
        config=cfg,
        bpe=bpe,
        original=original,
        test_set=test_set,
        discriminator=disc,
        bt_data=bt_data,
        fdis_by_pivot=fdis_by_pivot,
        fdis_data=fdis_data,
        mtask_data=mtask_data,
    )


def _model_config(cfg: DeskBenchConfig, seed: int) -> Seq2SeqConfig:
    return Seq2SeqConfig(
        embed_dim=cfg.embed_dim,
        hidden=cfg.hidden,
        attn_dim=cfg.attn_dim,
        max_len=cfg.max_len,
        seed=seed,
    )


def _regime(cfg: DeskBenchConfig, kind: str, balance: str, seed: int) -> TrainingRegime:
    return TrainingRegime(
        kind=kind,
        pretrain_steps=cfg.pretrain_steps,
        finetune_steps=cfg.finetune_steps,
        pretrain_schedule=LrSchedule(cfg.base_lr, cfg.warmup),
        finetune_lr=cfg.finetune_lr,
        st_balance=balance,
        batch_size=cfg.batch_size,
        seed=seed,
    )


@dataclass(frozen=True)
class RunSpec:
    """One training run: which regime over which augmentation sources."""

    setup: str  # "original_only" | "augmented_only" | "st" | "ptft"
    sources: tuple[str, ...] = ("bt", "fdis", "mtask")
    balance: str = "none"
    seed: int = 0


_WORKER_BENCH: DeskBench | None = None


def _set_worker_bench(bench: DeskBench) -> None:
    global _WORKER_BENCH
    _WORKER_BENCH = bench
    _limit_blas_threads()


def _execute_run(spec: RunSpec) -> float:
    bench = _WORKER_BENCH
    cfg = bench.config
    model = new_seq2seq(bench.bpe, _model_config(cfg, seed=spec.seed))
    total = cfg.pretrain_steps + cfg.finetune_steps
    if spec.setup == "original_only":
        train_on_dataset(
            model, bench.original, total, LrSchedule(cfg.base_lr, cfg.warmup),
            seed=spec.seed, batch_size=cfg.batch_size,
        )
    elif spec.setup == "augmented_only":
        train_on_dataset(
            model, bench.augmented_for(spec.sources), total,
            LrSchedule(cfg.base_lr, cfg.warmup), seed=spec.seed, batch_size=cfg.batch_size,
        )
    elif spec.setup == "st":
        run_st(
            model, bench.augmented_for(spec.sources), bench.original,
            _regime(cfg, "st", spec.balance, spec.seed),
        )
    elif spec.setup == "ptft":
        run_ptft(
            model, bench.augmented_for(spec.sources), bench.original,
            _regime(cfg, "ptft", "none", spec.seed),
        )
    else:
        raise ContractViolation(f"unknown run setup {spec.setup!r}")
    return evaluate_bleu(model, bench.test_set)


class DeskLab:
    """Runs and memoizes benchmark training runs, optionally in parallel."""

    def __init__(self, bench: DeskBench, workers: int | None = None):
        self.bench = bench
        self.workers = workers if workers is not None else bench.config.workers
        self._memo: dict[RunSpec, float] = {}

    def bleu_for(self, specs: list[RunSpec]) -> dict[RunSpec, float]:
        missing = [s for s in specs if s not in self._memo]
        if missing:
            if self.workers > 1 and len(missing) > 1:
                ctx_kwargs = {}
                with ProcessPoolExecutor(
                    max_workers=self.workers,
                    initializer=_set_worker_bench,
                    initargs=(self.bench,),
                    **ctx_kwargs,
                ) as pool:
                    for spec, bleu in zip(missing, pool.map(_execute_run, missing)):
                        self._memo[spec] = bleu
            else:
                _set_worker_bench(self.bench)
                for spec in missing:
                    self._memo[spec] = _execute_run(spec)
        return {s: self._memo[s] for s in specs}

    def median(self, base: RunSpec) -> float:
        specs = [replace(base, seed=s) for s in self.bench.config.seeds]
        values = self.bleu_for(specs)
        return float(np.median([values[s] for s in specs]))


TABLE1_ROWS = (
    ("Original data", RunSpec(setup="original_only")),
    ("Augmented data", RunSpec(setup="augmented_only")),
    ("ST", RunSpec(setup="st", balance="none")),
    ("ST (up-sampling)", RunSpec(setup="st", balance="up_sample")),
    ("ST (down-sampling)", RunSpec(setup="st", balance="down_sample")),
    ("PT&FT", RunSpec(setup="ptft")),
)

TABLE2_ROWS = (
    ("Original data", RunSpec(setup="original_only")),
    ("+ BT", RunSpec(setup="ptft", sources=("bt",))),
    ("+ F-Dis", RunSpec(setup="ptft", sources=("fdis",))),
    ("+ M-Task", RunSpec(setup="ptft", sources=("mtask",))),
    ("+ BT + M-Task + F-Dis", RunSpec(setup="ptft")),
)


def table1_desk(lab: DeskLab) -> dict:
    """Regime comparison: original-only vs ST (3 balance modes) vs PT&FT."""
    rows = []
    for label, base in TABLE1_ROWS:
        if label == "Augmented data" and not lab.bench.config.include_augmented_only:
            continue
        per_seed = lab.bleu_for([replace(base, seed=s) for s in lab.bench.config.seeds])
        values = [per_seed[k] for k in sorted(per_seed, key=lambda s: s.seed)]
        rows.append({"label": label, "median_bleu": float(np.median(values)), "per_seed": values})
    return {"table": "regime_comparison", "rows": rows, "seeds": list(lab.bench.config.seeds)}


def table2_desk(lab: DeskLab) -> dict:
    """Per-source augmentation comparison under PT&FT."""
    rows = []
    for label, base in TABLE2_ROWS:
        per_seed = lab.bleu_for([replace(base, seed=s) for s in lab.bench.config.seeds])
        values = [per_seed[k] for k in sorted(per_seed, key=lambda s: s.seed)]
        rows.append({"label": label, "median_bleu": float(np.median(values)), "per_seed": values})
    return {"table": "augmentation_sources", "rows": rows, "seeds": list(lab.bench.config.seeds)}


def table5_desk(bench: DeskBench, corpus_size: int = 1000, seed: int | None = None) -> dict:
    """F-Dis kept-pair counts per mock provider over one shared corpus."""
    cfg = bench.config
    rng = np.random.default_rng(cfg.seed + 505 if seed is None else seed)
    used: set = set()
    corpus = Corpus(
        [Sentence(informalize(f, rng)) for f in draw_formal_sentences(rng, corpus_size, used)],
        name="pivot-study",
    )
    datasets = {}
    for pivot in MOCK_PIVOTS:
        pairs, _ = round_trip(make_provider(pivot), corpus, pivot, FdisConfig(sigma=cfg.sigma))
        datasets[pivot] = filter_by_formality(pairs, bench.discriminator, cfg.sigma, pivot=pivot)
    report = pivot_report(datasets)
    return {
        "table": "pivot_strengths",
        "sigma": cfg.sigma,
        "corpus_size": corpus_size,
        "rows": [
            {
                "pivot": r.pivot,
                "kept": r.kept,
                "attempted": r.attempted,
                "mean_gain": r.mean_gain,
            }
            for r in report.rows
        ],
        "rendered": report.render(),
    }


def humaneval_desk(
    bench: DeskBench,
    out_dir,
    n_items: int = 100,
    seed: int | None = None,
) -> dict:
    """Train the comparison systems, decode the test inputs, and emit an
    anonymized annotation batch (items file + separate hidden key)."""
    cfg = bench.config
    seed = cfg.seed if seed is None else seed
    _set_worker_bench(bench)
    systems: dict[str, list[Sentence]] = {}
    dc = DecodeConfig(mode="greedy", max_len=cfg.max_len)
    inputs = [src for src, _ in bench.test_set.items]

    original_model = new_seq2seq(bench.bpe, _model_config(cfg, seed=seed))
    train_on_dataset(
        original_model, bench.original, cfg.pretrain_steps + cfg.finetune_steps,
        LrSchedule(cfg.base_lr, cfg.warmup), seed=seed, batch_size=cfg.batch_size,
    )
    systems["original-only"] = [decode(original_model, s, dc) for s in inputs]

    st_model = new_seq2seq(bench.bpe, _model_config(cfg, seed=seed + 1))
    run_st(st_model, bench.augmented_all, bench.original, _regime(cfg, "st", "none", seed))
    systems["st-none"] = [decode(st_model, s, dc) for s in inputs]

    ptft_models = []
    for k in range(3):
        m = new_seq2seq(bench.bpe, _model_config(cfg, seed=seed + 10 + k))
        run_ptft(m, bench.augmented_all, bench.original, _regime(cfg, "ptft", "none", seed + k))
        ptft_models.append(m)
    systems["ptft"] = [decode(ptft_models[0], s, dc) for s in inputs]
    systems["ptft-ensemble"] = [ensemble_decode(ptft_models, s, dc) for s in inputs]

    n = min(n_items, len(inputs))
    items, key = build_humaneval_batch(inputs, systems, n, seed=seed)
    os.makedirs(out_dir, exist_ok=True)
    items_path = os.path.join(out_dir, "items.json")
    key_path = os.path.join(out_dir, "key.json")
    save_items(items, items_path)
    save_key(key, key_path)
    return {
        "recipe": "humaneval_desk",
        "n_items": n,
        "systems": sorted(systems),
        "items_file": items_path,
        "key_file": key_path,
    }


def write_report(payload: dict, path) -> None:
    """Atomic JSON report write (temp file + rename)."""
    directory = os.path.dirname(str(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def render_table(report: dict) -> str:
    lines = [report.get("table", report.get("recipe", "report"))]
    for row in report.get("rows", []):
        if "median_bleu" in row:
            per_seed = " ".join(f"{v:.2f}" for v in row["per_seed"])
            lines.append(f"{row['label']}: {row['median_bleu']:.2f} (seeds: {per_seed})")
        else:
            lines.append(f"{row['pivot']} {row['kept']}")
    return "\n".join(lines) + "\n"
