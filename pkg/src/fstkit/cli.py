"""Command-line interface."""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from . import bpe as bpe_mod
from . import evaluation, recipes, textdata
from .bt import BtConfig, generate_bt_pairs, select_formal, train_bt_model
from .config import load_config
from .discriminator import (
    DiscriminatorConfig,
    evaluate_accuracy,
    load_discriminator,
    save_discriminator,
    score_corpus,
    train_discriminator,
)
from .errors import ContractViolation, ParseError, ProviderContractError, ProviderTransportError
from .fdis import FdisConfig, filter_by_formality, make_provider, round_trip
from .mtask import mtask_pairs
from .neural import LrSchedule
from .seq2seq import (
    DecodeConfig,
    Seq2SeqConfig,
    ensemble_decode,
    load_seq2seq,
    new_seq2seq,
    save_seq2seq,
)
from .training import TrainingRegime, run_ptft, run_st

ENDPOINT_ENV = "FSTKIT_MT_ENDPOINT"

_ERRORS = (ContractViolation, ParseError, ProviderContractError, ProviderTransportError, OSError)


def _fail_on_errors(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _ERRORS as exc:
            raise click.ClickException(str(exc))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
def main():
    """Desk-scale formality style transfer toolkit."""


# -- data ------------------------------------------------------------------


@main.group()
def data():
    """Synthetic corpora, statistics, and balancing."""


@data.command("synth")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=int, default=1000, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
@_fail_on_errors
def data_synth(seed, n, out_dir):
    """Generate the synthetic parallel + monolingual corpora."""
    parallel, formal, informal = textdata.generate_synthetic_fst(seed, n)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    textdata.save_tsv(parallel, out / "parallel.tsv")
    textdata.save_jsonl(parallel, out / "parallel.jsonl")
    textdata.save_corpus(formal, out / "formal.txt")
    textdata.save_corpus(informal, out / "informal.txt")
    click.echo(f"wrote {len(parallel)} pairs and 2x{n} monolingual sentences to {out_dir}")


@data.command("stats")
@click.option("--in", "path", type=click.Path(exists=True), required=True)
@_fail_on_errors
def data_stats(path):
    """Dataset statistics for a JSON-lines pair file."""
    dataset = textdata.load_jsonl(path)
    click.echo(textdata.dataset_stats(dataset).render(), nl=False)


@data.command("balance")
@click.option("--orig", type=click.Path(exists=True), required=True)
@click.option("--aug", type=click.Path(exists=True), required=True)
@click.option("--mode", type=click.Choice(textdata.BALANCE_MODES), default="none")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def data_balance(orig, aug, mode, seed, out):
    """Combine original and augmented data under a balancing mode."""
    original = _load_pairs(orig)
    augmented = _load_pairs(aug)
    combined = textdata.balance(original, augmented, mode, seed)
    textdata.save_jsonl(combined, out)
    click.echo(f"wrote {len(combined)} pairs to {out}")


def _load_pairs(path) -> textdata.ParallelDataset:
    if str(path).endswith(".tsv"):
        return textdata.load_corpus(path, "tsv_parallel")
    return textdata.load_jsonl(path)


def _load_many_pairs(paths: str) -> textdata.ParallelDataset:
    datasets = [_load_pairs(p) for p in str(paths).split(",") if p]
    pairs = [pair for ds in datasets for pair in ds.pairs]
    if not pairs:
        raise ContractViolation(f"no pairs loaded from {paths!r}")
    return textdata.ParallelDataset(pairs, metadata={"sources": paths})


# -- bpe ---------------------------------------------------------------


@main.group()
def bpe():
    """Byte-pair-encoding subword models."""


@bpe.command("learn")
@click.option("--in", "paths", required=True, help="comma-separated line corpora")
@click.option("--merges", type=int, default=1000, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def bpe_learn(paths, merges, out):
    corpora = [textdata.load_corpus(p, "lines") for p in paths.split(",")]
    model = bpe_mod.learn_bpe(corpora, merges)
    bpe_mod.save_bpe(model, out)
    click.echo(f"learned {len(model.merges)} merges, vocab {len(model)} -> {out}")


@bpe.command("encode")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--in", "path", type=click.Path(exists=True), required=True)
@_fail_on_errors
def bpe_encode_cmd(model_path, path):
    model = bpe_mod.load_bpe(model_path)
    for sentence in textdata.load_corpus(path, "lines"):
        click.echo(" ".join(str(i) for i in bpe_mod.encode(model, sentence)))


# -- discriminator -----------------------------------------------------


@main.group()
def discriminator():
    """Formality discriminator training and scoring."""


@discriminator.command("train")
@click.option("--informal", type=click.Path(exists=True), required=True)
@click.option("--formal", type=click.Path(exists=True), required=True)
@click.option("--bpe", "bpe_path", type=click.Path(exists=True), default=None)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def discriminator_train(informal, formal, bpe_path, epochs, seed, out):
    labeled = [(s, 0) for s in textdata.load_corpus(informal, "lines")]
    labeled += [(s, 1) for s in textdata.load_corpus(formal, "lines")]
    shared_bpe = bpe_mod.load_bpe(bpe_path) if bpe_path else None
    cfg = DiscriminatorConfig(epochs=epochs, seed=seed)
    model = train_discriminator(labeled, cfg, bpe=shared_bpe)
    save_discriminator(model, out)
    last = model.train_log[-1]
    click.echo(f"trained; final loss {last['loss']:.4f}, holdout acc {last['holdout_accuracy']}")


@discriminator.command("score")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--in", "path", type=click.Path(exists=True), required=True)
@_fail_on_errors
def discriminator_score(model_path, path):
    model = load_discriminator(model_path)
    corpus = textdata.load_corpus(path, "lines")
    for sentence, score in zip(corpus, score_corpus(model, corpus.sentences)):
        click.echo(f"{score:.6f}\t{sentence.text}")


@discriminator.command("evaluate")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--informal", type=click.Path(exists=True), required=True)
@click.option("--formal", type=click.Path(exists=True), required=True)
@_fail_on_errors
def discriminator_evaluate(model_path, informal, formal):
    model = load_discriminator(model_path)
    labeled = [(s, 0) for s in textdata.load_corpus(informal, "lines")]
    labeled += [(s, 1) for s in textdata.load_corpus(formal, "lines")]
    click.echo(f"accuracy {evaluate_accuracy(model, labeled):.4f}")


# -- augment -----------------------------------------------------------


@main.group()
def augment():
    """Data augmentation: back translation, F-Dis, M-Task."""


@augment.command("bt-train")
@click.option("--orig", type=click.Path(exists=True), required=True)
@click.option("--bpe", "bpe_path", type=click.Path(exists=True), default=None)
@click.option("--steps", type=int, default=1500, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def augment_bt_train(orig, bpe_path, steps, seed, out):
    """Train the reverse (formal->informal) model used by `augment bt`."""
    original = _load_pairs(orig)
    model = _fresh_model(original, bpe_path, seed)
    cfg = BtConfig(train_steps=steps, seed=seed)
    model, losses = train_bt_model(original, model, cfg)
    save_seq2seq(model, out)
    click.echo(f"trained BT model for {steps} steps; final loss {losses[-1]:.4f}")


def _fresh_model(parallel, bpe_path, seed):
    if bpe_path:
        model_bpe = bpe_mod.load_bpe(bpe_path)
    else:
        model_bpe = bpe_mod.learn_bpe(
            [
                textdata.Corpus([p.source for p in parallel.pairs]),
                textdata.Corpus([p.target for p in parallel.pairs]),
            ],
            700,
        )
    return new_seq2seq(model_bpe, Seq2SeqConfig(embed_dim=40, hidden=80, attn_dim=32, seed=seed))


@augment.command("bt")
@click.option("--formal", type=click.Path(exists=True), required=True)
@click.option("--bt-model", type=click.Path(exists=True), required=True)
@click.option("--disc", type=click.Path(exists=True), default=None,
              help="discriminator checkpoint for formal selection")
@click.option("--threshold", type=float, default=0.9, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def augment_bt(formal, bt_model, disc, threshold, out):
    corpus = textdata.load_corpus(formal, "lines")
    if disc:
        corpus = select_formal(corpus, load_discriminator(disc), threshold)
    model = load_seq2seq(bt_model)
    dataset = generate_bt_pairs(model, corpus, BtConfig(formal_threshold=threshold))
    textdata.save_jsonl(dataset, out)
    click.echo(f"wrote {len(dataset)} bt pairs to {out}")


@augment.command("fdis")
@click.option("--pivot", type=click.Choice(textdata.PIVOTS), required=True)
@click.option("--sigma", type=float, default=0.6, show_default=True)
@click.option("--provider", "provider_name", default="mock-strong", show_default=True)
@click.option("--in", "path", type=click.Path(exists=True), required=True)
@click.option("--disc", type=click.Path(exists=True), required=True)
@click.option("--cache", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def augment_fdis(pivot, sigma, provider_name, path, disc, cache, out):
    provider = make_provider(provider_name, endpoint=os.environ.get(ENDPOINT_ENV))
    corpus = textdata.load_corpus(path, "lines")
    cfg = FdisConfig(sigma=sigma, cache_path=cache)
    pairs, stats = round_trip(provider, corpus, pivot, cfg)
    model = load_discriminator(disc)
    dataset = filter_by_formality(pairs, model, sigma, pivot=pivot)
    textdata.save_jsonl(dataset, out)
    click.echo(
        f"kept {len(dataset)}/{stats.attempted} (skipped {stats.skipped}, "
        f"provider calls {stats.provider_calls}, cache hits {stats.cache_hits}) -> {out}"
    )


@augment.command("mtask")
@click.option("--m2", "m2_paths", required=True, help="comma-separated M2 files")
@click.option("--annotators", type=click.Choice(["all", "first"]), default="all")
@click.option("--out", type=click.Path(), required=True)
@_fail_on_errors
def augment_mtask(m2_paths, annotators, out):
    records = []
    files = m2_paths.split(",")
    for path in files:
        records.extend(textdata.parse_m2(Path(path).read_text(encoding="utf-8")))
    dataset = mtask_pairs(records, annotators=annotators, source_files=files)
    textdata.save_jsonl(dataset, out)
    click.echo(f"wrote {len(dataset)} mtask pairs from {len(records)} records to {out}")


# -- train / translate ---------------------------------------------------


@main.command("train")
@click.option("--regime", type=click.Choice(["ptft", "st"]), default="ptft", show_default=True)
@click.option("--aug", required=True, help="comma-separated augmented pair files")
@click.option("--orig", type=click.Path(exists=True), required=True)
@click.option("--eval", "eval_path", type=click.Path(exists=True), default=None)
@click.option("--bpe", "bpe_path", type=click.Path(exists=True), default=None)
@click.option("--pretrain-steps", type=int, default=3000, show_default=True)
@click.option("--finetune-steps", type=int, default=1000, show_default=True)
@click.option("--base-lr", type=float, default=0.0005, show_default=True)
@click.option("--warmup", type=int, default=200, show_default=True)
@click.option("--finetune-lr", type=float, default=0.00025, show_default=True)
@click.option("--balance", type=click.Choice(textdata.BALANCE_MODES), default="none")
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_fail_on_errors
def train_cmd(regime, aug, orig, eval_path, bpe_path, pretrain_steps, finetune_steps,
              base_lr, warmup, finetune_lr, balance, batch_size, seed, out_dir):
    """Train under a regime; multiple --aug files concatenate."""
    original = _load_pairs(orig)
    augmented = _load_many_pairs(aug)
    eval_set = textdata.load_multiref(eval_path) if eval_path else None
    model = _fresh_model(original, bpe_path, seed)
    regime_cfg = TrainingRegime(
        kind=regime,
        pretrain_steps=pretrain_steps,
        finetune_steps=finetune_steps,
        pretrain_schedule=LrSchedule(base_lr, warmup),
        finetune_lr=finetune_lr,
        st_balance=balance,
        batch_size=batch_size,
        seed=seed,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = run_ptft if regime == "ptft" else run_st
    model, log = runner(model, augmented, original, regime_cfg, eval_set=eval_set, out_dir=out)
    summary = {
        "regime": regime,
        "steps": len(log.entries),
        "final_loss": log.entries[-1].loss,
        "bleu": log.bleu,
        "checkpoints": log.checkpoints,
    }
    recipes.write_report(summary, out / "train_summary.json")
    click.echo(json.dumps(summary, indent=1, sort_keys=True))


@main.command("translate")
@click.option("--model", "model_paths", required=True, help="ckpt[,ckpt2,...] (ensemble)")
@click.option("--in", "path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--beam", type=int, default=4, show_default=True)
@click.option("--max-len", type=int, default=48, show_default=True)
@_fail_on_errors
def translate_cmd(model_paths, path, out, beam, max_len):
    """Decode a line corpus; multiple checkpoints trigger ensemble decoding."""
    models = [load_seq2seq(p) for p in model_paths.split(",")]
    corpus = textdata.load_corpus(path, "lines")
    cfg = DecodeConfig(mode="beam" if beam > 1 else "greedy", beam_width=max(beam, 1), max_len=max_len)
    with open(out, "w", encoding="utf-8") as fh:
        for sentence in corpus:
            result = ensemble_decode(models, sentence, cfg)
            fh.write(result.text + "\n")
    click.echo(f"decoded {len(corpus)} sentences -> {out}")


# -- eval ----------------------------------------------------------------


@main.group(name="eval")
def eval_group():
    """BLEU and human-evaluation tooling."""


@eval_group.command("bleu")
@click.option("--hyp", type=click.Path(exists=True), required=True)
@click.option("--refs", required=True, help="comma-separated reference files")
@_fail_on_errors
def eval_bleu(hyp, refs):
    hyps = list(textdata.load_corpus(hyp, "lines"))
    ref_corpora = [list(textdata.load_corpus(p, "lines")) for p in refs.split(",")]
    for rc in ref_corpora:
        if len(rc) != len(hyps):
            raise ContractViolation("reference file length differs from hypothesis file")
    ref_sets = [[rc[i] for rc in ref_corpora] for i in range(len(hyps))]
    report = evaluation.corpus_bleu(hyps, ref_sets)
    click.echo(report.render())


@eval_group.command("humaneval-build")
@click.option("--inputs", type=click.Path(exists=True), required=True)
@click.option("--outputs", required=True, help="sysid=file,sysid=file,... (exactly 4)")
@click.option("--n", type=int, default=300, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", type=click.Path(), required=True)
@_fail_on_errors
def eval_humaneval_build(inputs, outputs, n, seed, out_dir):
    test_inputs = list(textdata.load_corpus(inputs, "lines"))
    system_outputs = {}
    for part in outputs.split(","):
        system, _, path = part.partition("=")
        if not path:
            raise ContractViolation(f"expected sysid=file, got {part!r}")
        system_outputs[system] = list(textdata.load_corpus(path, "lines"))
    items, key = evaluation.build_humaneval_batch(test_inputs, system_outputs, n, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    evaluation.save_items(items, out / "items.json")
    evaluation.save_key(key, out / "key.json")
    click.echo(f"wrote {len(items)} items (key kept separately) to {out_dir}")


@eval_group.command("humaneval-report")
@click.option("--ratings", type=click.Path(exists=True), required=True)
@click.option("--key", "key_path", type=click.Path(exists=True), required=True)
@click.option("--baseline", required=True)
@click.option("--seed", type=int, default=0)
@_fail_on_errors
def eval_humaneval_report(ratings, key_path, baseline, seed):
    records = evaluation.load_ratings(ratings)
    key = evaluation.load_key(key_path)
    report = evaluation.aggregate_ratings(records, key, baseline, seed=seed)
    click.echo(report.render(), nl=False)


# -- recipes, server, config ---------------------------------------------


@main.command("recipe")
@click.argument("name", type=click.Choice(["table1_desk", "table2_desk", "table5_desk", "humaneval_desk"]))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out-dir", type=click.Path(), required=True)
@_fail_on_errors
def recipe_cmd(name, config_path, out_dir):
    """Run a desk-scale experiment recipe and write its report files."""
    run_cfg = load_config(config_path) if config_path else None
    bench_cfg = run_cfg.bench if run_cfg else recipes.DeskBenchConfig()
    workers = run_cfg.workers if run_cfg else bench_cfg.workers
    bench = recipes.build_desk_benchmark(bench_cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if name in ("table1_desk", "table2_desk"):
        lab = recipes.DeskLab(bench, workers=workers)
        report = recipes.table1_desk(lab) if name == "table1_desk" else recipes.table2_desk(lab)
        recipes.write_report(report, out / f"{name}.json")
        (out / f"{name}.txt.tmp").write_text(recipes.render_table(report), encoding="utf-8")
        os.replace(out / f"{name}.txt.tmp", out / f"{name}.txt")
    elif name == "table5_desk":
        report = recipes.table5_desk(bench)
        recipes.write_report(report, out / "table5_desk.json")
        (out / "table5_desk.txt.tmp").write_text(report["rendered"], encoding="utf-8")
        os.replace(out / "table5_desk.txt.tmp", out / "table5_desk.txt")
    else:
        report = recipes.humaneval_desk(bench, out)
        recipes.write_report(report, out / "humaneval_desk.json")
    click.echo(f"recipe {name} complete -> {out_dir}")


@main.command("serve-annotation")
@click.option("--items", type=click.Path(exists=True), required=True)
@click.option("--ratings", type=click.Path(), required=True)
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--ui-dir", type=click.Path(exists=True), default=None)
@_fail_on_errors
def serve_annotation_cmd(items, ratings, port, ui_dir):
    """Serve the annotation UI and JSON API until interrupted."""
    from .server import serve_annotation

    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(candidate) if candidate.is_dir() else None
    click.echo(f"serving on http://127.0.0.1:{port} (ui: {ui_dir or 'API only'})")
    serve_annotation(items, ratings, port, ui_dir=ui_dir)


@main.group()
def config():
    """Run-configuration helpers."""


@config.command("validate")
@click.option("--config", "config_path", type=click.Path(), required=True)
@_fail_on_errors
def config_validate(config_path):
    cfg = load_config(config_path)
    click.echo(f"config ok: seed={cfg.seed}, workers={cfg.workers}, out_dir={cfg.out_dir}")


if __name__ == "__main__":
    main()
