import numpy as np
import pytest

from fstkit.bpe import learn_bpe
from fstkit.bt import BtConfig, generate_bt_pairs, select_formal, train_bt_model
from fstkit.discriminator import DiscriminatorConfig, score_formality, train_discriminator
from fstkit.errors import ContractViolation
from fstkit.mtask import mtask_pairs
from fstkit.neural import LrSchedule
from fstkit.seq2seq import DecodeConfig, Seq2SeqConfig, decode, new_seq2seq
from fstkit.textdata import (
    Corpus,
    ParallelDataset,
    ParallelPair,
    Sentence,
    generate_synthetic_fst,
    parse_m2,
)


@pytest.fixture(scope="module")
def disc_model():
    parallel, _, _ = generate_synthetic_fst(3, 200)
    data = [(p.source, 0) for p in parallel.pairs] + [(p.target, 1) for p in parallel.pairs]
    cfg = DiscriminatorConfig(
        embed_dim=24, maps_per_width=16, epochs=10, batch_size=32, seed=2, holdout_fraction=0.1
    )
    return train_discriminator(data, cfg)


FOUR = [
    ("plz send it 2 me", "Please send it to me."),
    ("u r late lol", "You are late."),
    ("thx 4 the file", "Thank you for the file."),
    ("i need ur report", "I need your report."),
]


@pytest.fixture(scope="module")
def overfit_bt():
    pairs = [ParallelPair(Sentence(s), Sentence(t)) for s, t in FOUR]
    dataset = ParallelDataset(pairs)
    bpe = learn_bpe(
        [Corpus([p.source for p in pairs]), Corpus([p.target for p in pairs])], 60
    )
    model = new_seq2seq(bpe, Seq2SeqConfig(embed_dim=24, hidden=32, attn_dim=16, seed=4))
    cfg = BtConfig(train_steps=600, batch_size=4, schedule=LrSchedule(0.004, 50))
    model, losses = train_bt_model(dataset, model, cfg)
    return model, dataset, losses


class TestSelectFormal:
    def test_zero_threshold_keeps_all(self, disc_model):
        _, formal, _ = generate_synthetic_fst(8, 30)
        assert len(select_formal(formal, disc_model, 0.0)) == 30

    def test_threshold_validation(self):
        with pytest.raises(ContractViolation):
            BtConfig(formal_threshold=1.0 + 1e-9)

    def test_mixed_corpus_separation(self, disc_model):
        parallel, _, _ = generate_synthetic_fst(31, 100)
        mixed = Corpus(
            [p.target for p in parallel.pairs] + [p.source for p in parallel.pairs]
        )
        kept = select_formal(mixed, disc_model, 0.9)
        formal_texts = {p.target.text for p in parallel.pairs}
        kept_formal = sum(1 for s in kept if s.text in formal_texts)
        kept_informal = len(kept) - kept_formal
        assert kept_formal >= 90
        assert kept_informal <= 10

    def test_order_preserved(self, disc_model):
        _, formal, _ = generate_synthetic_fst(8, 40)
        kept = select_formal(formal, disc_model, 0.5)
        positions = {s.text: i for i, s in enumerate(formal.sentences)}
        indices = [positions[s.text] for s in kept.sentences]
        assert indices == sorted(indices)


class TestBtModel:
    def test_loss_descends(self, overfit_bt):
        _, _, losses = overfit_bt
        assert np.mean(losses[-20:]) < losses[0]

    def test_swapped_orientation_observable(self, overfit_bt):
        model, dataset, _ = overfit_bt
        dc = DecodeConfig(mode="greedy", max_len=24)
        # feeding a formal training target yields its informal counterpart
        hits = 0
        for p in dataset.pairs:
            out = decode(model, p.target, dc)
            assert out.text != p.target.text
            hits += out.text == p.source.text
        assert hits == len(dataset.pairs)

    def test_empty_dataset_rejected(self):
        bpe = learn_bpe([Corpus([Sentence("a b")])], 2)
        model = new_seq2seq(bpe, Seq2SeqConfig(embed_dim=8, hidden=8, attn_dim=6, seed=0))
        with pytest.raises(ContractViolation):
            train_bt_model(ParallelDataset([]), model, BtConfig(train_steps=5))


class TestGenerateBtPairs:
    def test_empty_corpus(self, overfit_bt):
        model, _, _ = overfit_bt
        out = generate_bt_pairs(model, Corpus([]))
        assert len(out) == 0

    def test_orientation_and_provenance(self, overfit_bt):
        model, dataset, _ = overfit_bt
        formal = Corpus([p.target for p in dataset.pairs])
        out = generate_bt_pairs(model, formal, BtConfig(decode=DecodeConfig(max_len=24)))
        formal_texts = {s.text for s in formal.sentences}
        assert len(out) >= 1
        for pair in out.pairs:
            assert pair.provenance == "bt"
            assert pair.target.text in formal_texts

    def test_overfit_sources_match_informal(self, overfit_bt):
        model, dataset, _ = overfit_bt
        formal = Corpus([p.target for p in dataset.pairs])
        out = generate_bt_pairs(model, formal, BtConfig(decode=DecodeConfig(max_len=24)))
        by_target = {p.target.text: p.source.text for p in out.pairs}
        for p in dataset.pairs:
            assert by_target[p.target.text] == p.source.text

    def test_size_bound_and_determinism(self, overfit_bt):
        model, dataset, _ = overfit_bt
        formal = Corpus([p.target for p in dataset.pairs] * 2)
        a = generate_bt_pairs(model, formal)
        b = generate_bt_pairs(model, formal)
        assert len(a) <= len(formal.sentences)
        assert a.pairs == b.pairs


M2_FIXTURE = """S I likes dogs
A 1 2|||SVA|||like|||REQUIRED|||-NONE-|||0
A 1 2|||SVA|||really like|||REQUIRED|||-NONE-|||1

S all good here
A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0

S he go school
A 1 2|||VT|||went|||REQUIRED|||-NONE-|||0
A 2 2|||PREP|||to|||REQUIRED|||-NONE-|||0
"""


class TestMtaskPairs:
    def test_first_mode_excludes_editless(self):
        records = parse_m2(M2_FIXTURE)
        ds = mtask_pairs(records, annotators="first")
        assert len(ds) == 2  # noop-only record contributes nothing

    def test_all_mode_one_pair_per_annotator(self):
        records = parse_m2(M2_FIXTURE)
        ds = mtask_pairs(records, annotators="all")
        assert len(ds) == 3
        texts = [(p.source.text, p.target.text) for p in ds.pairs]
        assert ("I likes dogs", "I like dogs") in texts
        assert ("I likes dogs", "I really like dogs") in texts

    def test_figure_style_gec_pair(self):
        records = parse_m2(
            "S he go to school yesterday\nA 1 2|||VT|||went|||REQUIRED|||-NONE-|||0\n"
        )
        ds = mtask_pairs(records)
        assert ds.pairs[0].source.text == "he go to school yesterday"
        assert ds.pairs[0].target.text == "he went to school yesterday"

    def test_no_identity_outputs(self):
        records = parse_m2(M2_FIXTURE)
        for mode in ("all", "first"):
            for p in mtask_pairs(records, annotators=mode).pairs:
                assert p.source != p.target

    def test_provenance_and_metadata(self):
        records = parse_m2(M2_FIXTURE)
        ds = mtask_pairs(records, source_files=["fixture.m2"])
        assert all(p.provenance == "mtask" for p in ds.pairs)
        assert ds.metadata["source_files"] == "fixture.m2"

    def test_deterministic_order(self):
        records = parse_m2(M2_FIXTURE)
        a = mtask_pairs(records)
        b = mtask_pairs(records)
        assert a.pairs == b.pairs
        # record order first, then annotator id
        assert a.pairs[0].source.text == "I likes dogs"
        assert a.pairs[1].source.text == "I likes dogs"
        assert a.pairs[2].source.text == "he go school"

    def test_pair_count_bound(self):
        records = parse_m2(M2_FIXTURE)
        ds = mtask_pairs(records)
        max_annotators = max(len(r.annotators()) for r in records)
        assert len(ds) <= len(records) * max_annotators

    def test_bad_mode(self):
        with pytest.raises(ContractViolation):
            mtask_pairs([], annotators="some")


def test_bt_targets_pass_selecting_discriminator(disc_model, overfit_bt):
    model, dataset, _ = overfit_bt
    mixed = Corpus(
        [p.target for p in dataset.pairs] + [p.source for p in dataset.pairs]
    )
    selected = select_formal(mixed, disc_model, 0.7)
    out = generate_bt_pairs(model, selected, BtConfig(decode=DecodeConfig(max_len=24)))
    for pair in out.pairs:
        assert score_formality(disc_model, pair.target) >= 0.7
