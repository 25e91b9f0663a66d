import numpy as np
import pytest

from fstkit.bpe import learn_bpe
from fstkit.discriminator import (
    FORMAL,
    INFORMAL,
    DiscriminatorConfig,
    evaluate_accuracy,
    load_discriminator,
    save_discriminator,
    score_corpus,
    score_formality,
    train_discriminator,
)
from fstkit.errors import ContractViolation
from fstkit.neural import grad_check
from fstkit.textdata import Corpus, Sentence, generate_synthetic_fst

TINY_CFG = DiscriminatorConfig(
    embed_dim=16, maps_per_width=8, epochs=3, batch_size=16, seed=0, holdout_fraction=0.0
)


def labeled_synthetic(seed, n):
    parallel, _, _ = generate_synthetic_fst(seed, n)
    data = []
    for p in parallel.pairs:
        data.append((p.source, INFORMAL))
        data.append((p.target, FORMAL))
    return data


@pytest.fixture(scope="module")
def small_model():
    data = labeled_synthetic(7, 150)
    cfg = DiscriminatorConfig(
        embed_dim=24, maps_per_width=16, epochs=10, batch_size=32, seed=1, holdout_fraction=0.1
    )
    return train_discriminator(data, cfg), data


class TestTraining:
    def test_single_class_rejected(self):
        data = [(Sentence("hello there"), FORMAL), (Sentence("greetings"), FORMAL)]
        with pytest.raises(ContractViolation):
            train_discriminator(data, TINY_CFG)

    def test_overfits_one_pair_per_class(self):
        data = [
            (Sentence("plz send it 2 me lol"), INFORMAL),
            (Sentence("Please send it to me."), FORMAL),
        ]
        cfg = DiscriminatorConfig(
            embed_dim=16, maps_per_width=8, epochs=200, batch_size=4, seed=0,
            holdout_fraction=0.0, dropout=0.0,
        )
        model = train_discriminator(data, cfg)
        assert model.train_log[-1]["loss"] < 0.01

    def test_training_log_records_epochs(self, small_model):
        model, _ = small_model
        assert len(model.train_log) == 10
        assert all("loss" in e and "holdout_accuracy" in e for e in model.train_log)

    def test_separable_classes_learned(self, small_model):
        model, data = small_model
        heldout = labeled_synthetic(99, 60)
        assert evaluate_accuracy(model, heldout) >= 0.9

    def test_flipped_labels_anti_learn(self):
        data = labeled_synthetic(11, 100)
        flipped = [(s, 1 - label) for s, label in data]
        cfg = DiscriminatorConfig(
            embed_dim=24, maps_per_width=16, epochs=5, batch_size=32, seed=3, holdout_fraction=0.0
        )
        model = train_discriminator(flipped, cfg)
        fresh = labeled_synthetic(55, 60)
        assert evaluate_accuracy(model, fresh) <= 0.2


class TestScoring:
    def test_probabilities_complement(self, small_model):
        model, data = small_model
        for s, _ in data[:20]:
            p = score_formality(model, s)
            assert 0.0 <= p <= 1.0
        # 2-way softmax: P+ and P- sum to 1 by construction; check the
        # score against the full softmax row.
        ids = np.array([model.encode(data[0][0])], dtype=np.int64)
        from fstkit.discriminator import _forward, _softmax_row

        row = _softmax_row(_forward(model, ids, False, None).data[0])
        assert row.sum() == pytest.approx(1.0, abs=1e-12)
        assert score_formality(model, data[0][0]) == pytest.approx(row[FORMAL], abs=0)

    def test_deterministic(self, small_model):
        model, data = small_model
        s = data[0][0]
        assert score_formality(model, s) == score_formality(model, s)

    def test_single_token_sentence_scored(self, small_model):
        model, _ = small_model
        assert 0.0 <= score_formality(model, Sentence("report")) <= 1.0

    def test_whitespace_invariance(self, small_model):
        model, _ = small_model
        assert score_formality(model, Sentence("please send   it")) == score_formality(
            model, Sentence(" please send it ")
        )

    def test_batch_equals_single(self, small_model):
        model, data = small_model
        sentences = [s for s, _ in data[:40]]
        batch = score_corpus(model, sentences)
        single = [score_formality(model, s) for s in sentences]
        assert batch == single

    def test_formal_informal_separation(self, small_model):
        model, _ = small_model
        parallel, _, _ = generate_synthetic_fst(123, 100)
        ok = 0
        for p in parallel.pairs:
            if score_formality(model, p.target) > 0.9 and score_formality(model, p.source) < 0.1:
                ok += 1
        assert ok >= 90


class TestPersistence:
    def test_save_load_scores_bitwise(self, small_model, tmp_path):
        model, data = small_model
        path = tmp_path / "disc.json"
        save_discriminator(model, path)
        again = load_discriminator(path)
        for s, _ in data[:10]:
            assert score_formality(again, s) == score_formality(model, s)


class TestWordTokenizerFlag:
    def test_words_mode_trains(self):
        data = labeled_synthetic(5, 60)
        cfg = DiscriminatorConfig(
            embed_dim=16, maps_per_width=8, epochs=8, batch_size=32, seed=0,
            holdout_fraction=0.0, tokenizer="words",
        )
        model = train_discriminator(data, cfg)
        fresh = labeled_synthetic(6, 30)
        assert evaluate_accuracy(model, fresh) >= 0.8


def test_loss_gradcheck_two_sentences():
    from fstkit.discriminator import DiscriminatorModel, _forward
    from fstkit.neural import Tensor, cross_entropy_logits
    from fstkit.neural.tensor import tsum

    corpus = Corpus([Sentence("a b c d"), Sentence("b c a e")])
    bpe = learn_bpe([corpus], 4)
    cfg = DiscriminatorConfig(embed_dim=5, maps_per_width=3, dropout=0.5, seed=0)
    rng = np.random.default_rng(0)
    from fstkit.discriminator import _init_params

    ref = _init_params(rng, len(bpe), cfg)
    names = list(ref)
    from fstkit import bpe as bpe_lib

    ids = np.array(
        [bpe_lib.encode(bpe, Sentence("a b c d")), bpe_lib.encode(bpe, Sentence("b c a e"))]
    )
    labels = np.array([0, 1])

    def loss_fn(tensors):
        params = dict(zip(names, tensors))
        model = DiscriminatorModel(params=params, config=cfg, bpe=bpe)
        logits = _forward(model, ids, True, np.random.default_rng(77))
        return cross_entropy_logits(logits, labels)

    err = grad_check(loss_fn, [ref[n].data for n in names])
    assert err < 1e-4
