import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fstkit.errors import ContractViolation, ParseError
from fstkit import textdata as td
from fstkit.textdata import (
    Corpus,
    M2Record,
    ParallelDataset,
    ParallelPair,
    Sentence,
    apply_edits,
    balance,
    dataset_stats,
    dedup_pairs,
    generate_synthetic_fst,
    informalize,
    load_corpus,
    load_jsonl,
    parse_m2,
    save_corpus,
    save_jsonl,
    save_tsv,
    serialize_m2,
)


def pair(src, tgt, **kw):
    return ParallelPair(Sentence(src), Sentence(tgt), **kw)


def fdis_pair(src, tgt, pivot="fr", p_src=0.1, p_tgt=0.9):
    return ParallelPair(
        Sentence(src), Sentence(tgt), provenance="fdis", pivot=pivot,
        source_score=p_src, target_score=p_tgt,
    )


class TestSentence:
    def test_normalizes_whitespace(self):
        assert Sentence("  a \t b\nc ").text == "a b c"

    def test_normalization_idempotent(self):
        s = Sentence(" x   y ")
        assert Sentence(s.text).text == s.text

    def test_empty_rejected(self):
        with pytest.raises(ContractViolation):
            Sentence("   \n ")

    @given(st.text(min_size=1))
    @settings(max_examples=200)
    def test_idempotent_property(self, raw):
        norm = td.normalize_text(raw)
        assert td.normalize_text(norm) == norm


class TestPairInvariants:
    def test_pivot_requires_fdis(self):
        with pytest.raises(ContractViolation):
            pair("a", "b", pivot="fr")

    def test_fdis_requires_scores(self):
        with pytest.raises(ContractViolation):
            pair("a", "b", provenance="fdis", pivot="fr")

    def test_score_range(self):
        with pytest.raises(ContractViolation):
            fdis_pair("a", "b", p_tgt=1.5)


class TestLoadCorpus:
    def test_empty_file(self, tmp_path):
        f = tmp_path / "empty.txt"
        f.write_text("")
        assert len(load_corpus(f, "lines")) == 0

    def test_blank_lines_skipped(self, tmp_path):
        f = tmp_path / "c.txt"
        f.write_text("one\n\ntwo\nthree\n")
        corpus = load_corpus(f, "lines")
        assert [s.text for s in corpus] == ["one", "two", "three"]

    def test_crlf_equals_lf(self, tmp_path):
        lines = ["alpha one", "beta two", "gamma", "delta four", "epsilon"]
        lf = tmp_path / "lf.txt"
        crlf = tmp_path / "crlf.txt"
        lf.write_bytes(("\n".join(lines) + "\n").encode())
        crlf.write_bytes(("\r\n".join(lines) + "\r\n").encode())
        assert load_corpus(lf, "lines").sentences == load_corpus(crlf, "lines").sentences

    def test_invalid_utf8_names_offset(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_bytes(b"ok\n\xff\xfe")
        with pytest.raises(ParseError, match="byte offset 3"):
            load_corpus(f, "lines")

    def test_tsv_missing_tab_names_line(self, tmp_path):
        f = tmp_path / "p.tsv"
        f.write_text("a\tb\nno tab here\n")
        with pytest.raises(ParseError, match="line 2"):
            load_corpus(f, "tsv_parallel")

    def test_tsv_splits_on_first_tab(self, tmp_path):
        f = tmp_path / "p.tsv"
        f.write_text("src part\ttgt\twith tab\n")
        ds = load_corpus(f, "tsv_parallel")
        assert ds.pairs[0].source.text == "src part"
        assert ds.pairs[0].target.text == "tgt with tab"


class TestRoundTrips:
    def test_lines_round_trip(self, tmp_path):
        corpus = Corpus([Sentence("a b"), Sentence("c")], name="x.txt")
        p = tmp_path / "x.txt"
        save_corpus(corpus, p)
        again = load_corpus(p, "lines")
        assert again.sentences == corpus.sentences
        save_corpus(again, p)
        assert load_corpus(p, "lines").sentences == corpus.sentences

    def test_tsv_round_trip(self, tmp_path):
        ds = ParallelDataset([pair("a b", "c d"), pair("x", "y z")])
        p = tmp_path / "d.tsv"
        save_tsv(ds, p)
        again = load_corpus(p, "tsv_parallel")
        assert again.pairs == ds.pairs

    def test_jsonl_round_trip_with_scores(self, tmp_path):
        ds = ParallelDataset(
            [pair("a", "b"), fdis_pair("u r", "you are", pivot="de", p_src=0.123456789, p_tgt=0.98)],
            metadata={"method": "fdis", "seed": "3"},
        )
        p = tmp_path / "d.jsonl"
        save_jsonl(ds, p)
        again = load_jsonl(p)
        assert again.pairs == ds.pairs
        assert again.metadata == ds.metadata
        save_jsonl(again, p)
        assert load_jsonl(p).pairs == ds.pairs


M2_ONE_EDIT = "S I likes dogs\nA 1 2|||SVA|||like|||REQUIRED|||-NONE-|||0\n"


class TestParseM2:
    def test_no_edits(self):
        records = parse_m2("S I like dogs\n")
        assert len(records) == 1
        assert records[0].source_tokens == ["I", "like", "dogs"]
        assert records[0].edits == []

    def test_single_edit(self):
        (rec,) = parse_m2(M2_ONE_EDIT)
        (e,) = rec.edits
        assert (e.start, e.end, e.type, e.replacement, e.annotator) == (1, 2, "SVA", "like", 0)

    def test_noop_block(self):
        (rec,) = parse_m2("S fine sentence\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n")
        (e,) = rec.edits
        assert e.is_noop

    def test_a_before_s_rejected(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_m2("A 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n")

    def test_non_integer_span_names_line(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_m2("S a b\nA x 1|||T|||r|||REQUIRED|||-NONE-|||0\n")

    def test_span_out_of_range(self):
        with pytest.raises(ParseError):
            parse_m2("S a b\nA 1 5|||T|||r|||REQUIRED|||-NONE-|||0\n")

    def test_overlapping_edits_rejected(self):
        text = (
            "S a b c d\n"
            "A 0 2|||T|||x|||REQUIRED|||-NONE-|||0\n"
            "A 1 3|||T|||y|||REQUIRED|||-NONE-|||0\n"
        )
        with pytest.raises(ParseError, match="overlap"):
            parse_m2(text)

    def test_serialize_round_trip(self):
        text = (
            "S one two three\n"
            "A 0 1|||DEL||||||REQUIRED|||-NONE-|||1\n"
            "A 2 2|||INS|||new word|||REQUIRED|||-NONE-|||0\n"
            "\n"
            "S clean\n"
            "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n"
        )
        records = parse_m2(text)
        assert parse_m2(serialize_m2(records)) == records


class TestApplyEdits:
    def test_substitution(self):
        (rec,) = parse_m2(M2_ONE_EDIT)
        p = apply_edits(rec, 0)
        assert (p.source.text, p.target.text) == ("I likes dogs", "I like dogs")
        assert p.provenance == "mtask"

    def test_noop_gives_none(self):
        (rec,) = parse_m2("S ok\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n")
        assert apply_edits(rec, 0) is None

    def test_unknown_annotator_gives_none(self):
        (rec,) = parse_m2(M2_ONE_EDIT)
        assert apply_edits(rec, 7) is None

    def test_order_independence_right_to_left(self):
        # delete token 0 and replace tokens 2..3: right-to-left application
        # makes the outcome independent of edit order.
        rec = M2Record(
            ["drop", "keep", "old", "words", "end"],
            [
                td.Edit(0, 1, "DEL", "", 0),
                td.Edit(2, 4, "SUB", "new stuff", 0),
            ],
        )
        rec_rev = M2Record(rec.source_tokens, list(reversed(rec.edits)))
        out1 = apply_edits(rec, 0)
        out2 = apply_edits(rec_rev, 0)
        assert out1.target.text == "keep new stuff end"
        assert out1 == out2

    def test_insertion(self):
        (rec,) = parse_m2("S he went school\nA 2 2|||PREP|||to|||REQUIRED|||-NONE-|||0\n")
        assert apply_edits(rec, 0).target.text == "he went to school"

    def test_never_identity(self):
        (rec,) = parse_m2("S a b\nA 0 1|||T|||a|||REQUIRED|||-NONE-|||0\n")
        assert apply_edits(rec, 0) is None


class TestBalance:
    def make(self, n, tag):
        return ParallelDataset([pair(f"{tag} src {i}", f"{tag} tgt {i}") for i in range(n)])

    def test_none_concatenates(self):
        out = balance(self.make(3, "o"), self.make(5, "a"), "none", seed=1)
        assert len(out) == 8
        assert sorted(p.source.text for p in out) == sorted(
            [f"o src {i}" for i in range(3)] + [f"a src {i}" for i in range(5)]
        )

    def test_down_sample_counts(self):
        orig, aug = self.make(100, "o"), self.make(1000, "a")
        out = balance(orig, aug, "down_sample", seed=7)
        assert len(out) == 200
        aug_kept = [p for p in out if p.source.text.startswith("a")]
        assert len(aug_kept) == 100
        assert len(set(aug_kept)) == 100  # without replacement
        assert sorted(p.source.text for p in out if p.source.text.startswith("o")) == sorted(
            p.source.text for p in orig
        )

    def test_up_sample_counts(self):
        out = balance(self.make(100, "o"), self.make(1000, "a"), "up_sample", seed=7)
        assert len(out) == 2000
        counts = {}
        for p in out:
            if p.source.text.startswith("o"):
                counts[p.source.text] = counts.get(p.source.text, 0) + 1
        assert set(counts.values()) == {10}

    def test_seed_determinism(self):
        a = balance(self.make(10, "o"), self.make(30, "a"), "down_sample", seed=3)
        b = balance(self.make(10, "o"), self.make(30, "a"), "down_sample", seed=3)
        assert a.pairs == b.pairs

    def test_empty_rejected(self):
        with pytest.raises(ContractViolation):
            balance(ParallelDataset([]), self.make(3, "a"), "up_sample", seed=0)


class TestStats:
    def test_empty(self):
        report = dataset_stats(ParallelDataset([]))
        assert report.total == 0
        assert report.by_pivot == {}

    def test_per_pivot_counts(self):
        ds = ParallelDataset(
            [fdis_pair(f"s {i}", f"t {i}", pivot="fr") for i in range(3)]
            + [fdis_pair(f"s {i}", f"t {i}", pivot="de") for i in range(5)]
            + [fdis_pair(f"s {i}", f"t {i}", pivot="zh") for i in range(7)]
        )
        report = dataset_stats(ds)
        assert report.by_pivot == {"fr": 3, "de": 5, "zh": 7}

    def test_table5_scale_rendering(self):
        report = td.StatReport(
            total=1510000,
            by_provenance={"fdis": 1510000},
            by_pivot={"fr": 300000, "de": 530000, "zh": 680000},
            mean_source_len=10.0,
            mean_target_len=11.0,
        )
        lines = report.render().splitlines()
        assert "fr 300000" in lines
        assert "de 530000" in lines
        assert "zh 680000" in lines

    def test_counts_sum_to_total(self):
        ds = ParallelDataset([pair("a", "b"), pair("c", "d", provenance="bt")])
        report = dataset_stats(ds)
        assert sum(report.by_provenance.values()) == report.total == 2

    def test_render_deterministic(self):
        ds = ParallelDataset([pair("a b c", "d e")])
        assert dataset_stats(ds).render() == dataset_stats(ds).render()


class TestSyntheticGenerator:
    def test_same_seed_identical(self):
        out1 = generate_synthetic_fst(11, 50)
        out2 = generate_synthetic_fst(11, 50)
        assert out1[0].pairs == out2[0].pairs
        assert out1[1].sentences == out2[1].sentences
        assert out1[2].sentences == out2[2].sentences

    def test_rule_table_example(self):
        rng = np.random.default_rng(0)

        class NoFiller:
            def random(self):
                return 0.99

            def integers(self, n):
                return 0

        assert informalize("Please send the report to me.", NoFiller()) == "plz send the report 2 me"

    def test_informal_no_uppercase(self):
        parallel, _, informal = generate_synthetic_fst(5, 200)
        for p in parallel.pairs:
            assert p.source.text == p.source.text.lower()
        for s in informal:
            assert s.text == s.text.lower()

    def test_n_zero_rejected(self):
        with pytest.raises(ContractViolation):
            generate_synthetic_fst(1, 0)

    def test_splits_disjoint(self):
        parallel, formal, informal = generate_synthetic_fst(3, 300)
        formal_in_parallel = {p.target.text for p in parallel.pairs}
        assert formal_in_parallel.isdisjoint({s.text for s in formal})

    def test_sizes(self):
        parallel, formal, informal = generate_synthetic_fst(3, 40)
        assert len(parallel) == len(formal) == len(informal) == 40


class TestSyntheticGec:
    def test_m2_applies_back_to_formal(self):
        rng = np.random.default_rng(5)
        used = set()
        text = td.make_synthetic_m2(rng, 100, used)
        records = parse_m2(text)
        assert len(records) == 100
        n_pairs = 0
        for rec in records:
            out = apply_edits(rec, 0)
            if out is not None:
                n_pairs += 1
                assert out.source != out.target
        assert n_pairs >= 60  # most formal templates contain a corruptible token


def test_dedup_keeps_first():
    ds = ParallelDataset([pair("a", "b"), pair("a", "b"), pair("a", "c")])
    out = dedup_pairs(ds)
    assert len(out) == 2
