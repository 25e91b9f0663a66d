import json
from dataclasses import replace

import pytest

from fstkit.recipes import (
    DeskBenchConfig,
    DeskLab,
    RunSpec,
    build_desk_benchmark,
    humaneval_desk,
    render_table,
    table1_desk,
    table2_desk,
    table5_desk,
    write_report,
)

TINY = DeskBenchConfig(
    seed=0,
    n_original=100,
    n_formal_mono=130,
    n_informal_mono=130,
    n_gec=80,
    n_test=20,
    merges=220,
    embed_dim=16,
    hidden=20,
    attn_dim=12,
    max_len=64,
    batch_size=16,
    pretrain_steps=20,
    finetune_steps=10,
    bt_steps=30,
    disc_embed_dim=24,
    disc_maps=16,
    disc_epochs=16,
    seeds=(0, 1),
    workers=1,
)


@pytest.fixture(scope="module")
def tiny_bench():
    return build_desk_benchmark(TINY)


class TestBenchmarkBuild:
    def test_datasets_assembled(self, tiny_bench):
        assert len(tiny_bench.original) == 100
        assert len(tiny_bench.test_set) == 20
        assert len(tiny_bench.bt_data) > 0
        assert len(tiny_bench.mtask_data) > 0
        assert set(tiny_bench.fdis_by_pivot) == {"mock-strong", "mock-medium", "mock-weak"}

    def test_provenances(self, tiny_bench):
        assert {p.provenance for p in tiny_bench.bt_data.pairs} == {"bt"}
        assert {p.provenance for p in tiny_bench.fdis_data.pairs} <= {"fdis"}
        assert {p.provenance for p in tiny_bench.mtask_data.pairs} == {"mtask"}

    def test_reproducible(self):
        a = build_desk_benchmark(TINY)
        b = build_desk_benchmark(TINY)
        assert a.original.pairs == b.original.pairs
        assert a.bt_data.pairs == b.bt_data.pairs
        assert a.fdis_data.pairs == b.fdis_data.pairs

    def test_source_selection(self, tiny_bench):
        combined = tiny_bench.augmented_for(("bt", "mtask"))
        assert len(combined) == len(tiny_bench.bt_data) + len(tiny_bench.mtask_data)


class TestLab:
    def test_memoizes_runs(self, tiny_bench):
        lab = DeskLab(tiny_bench, workers=1)
        spec = RunSpec(setup="original_only", seed=0)
        first = lab.bleu_for([spec])[spec]
        again = lab.bleu_for([spec])[spec]
        assert first == again
        assert len(lab._memo) == 1

    def test_parallel_workers_match_serial(self, tiny_bench):
        specs = [RunSpec(setup="original_only", seed=0), RunSpec(setup="ptft", seed=0)]
        serial = DeskLab(tiny_bench, workers=1).bleu_for(specs)
        parallel = DeskLab(tiny_bench, workers=2).bleu_for(specs)
        assert serial == parallel


class TestTables:
    def test_table1_rows(self, tiny_bench):
        lab = DeskLab(tiny_bench, workers=1)
        report = table1_desk(lab)
        labels = [row["label"] for row in report["rows"]]
        assert labels == [
            "Original data",
            "Augmented data",
            "ST",
            "ST (up-sampling)",
            "ST (down-sampling)",
            "PT&FT",
        ]
        for row in report["rows"]:
            assert len(row["per_seed"]) == 2

    def test_table2_reuses_runs(self, tiny_bench):
        lab = DeskLab(tiny_bench, workers=1)
        table1_desk(lab)
        runs_before = len(lab._memo)
        report = table2_desk(lab)
        # original-only and the combined PT&FT rows are shared with table 1
        new_runs = len(lab._memo) - runs_before
        assert new_runs == 3 * len(TINY.seeds)
        assert [row["label"] for row in report["rows"]] == [
            "Original data", "+ BT", "+ F-Dis", "+ M-Task", "+ BT + M-Task + F-Dis",
        ]

    def test_table5_ordering_and_render(self, tiny_bench):
        report = table5_desk(tiny_bench, corpus_size=150)
        kept = {row["pivot"]: row["kept"] for row in report["rows"]}
        assert kept["mock-strong"] > kept["mock-medium"] > kept["mock-weak"]
        assert "mock-strong" in report["rendered"]

    def test_humaneval_desk(self, tiny_bench, tmp_path):
        result = humaneval_desk(tiny_bench, tmp_path, n_items=6)
        items = json.loads((tmp_path / "items.json").read_text())
        assert len(items) == 6
        key = json.loads((tmp_path / "key.json").read_text())
        systems = {s for mapping in key.values() for s in mapping.values()}
        assert systems == {"original-only", "st-none", "ptft", "ptft-ensemble"}
        text = (tmp_path / "items.json").read_text()
        for name in systems:
            assert name not in text


class TestReports:
    def test_atomic_write_and_determinism(self, tmp_path):
        payload = {"table": "x", "rows": [{"label": "a", "median_bleu": 1.0, "per_seed": [1.0]}]}
        path = tmp_path / "report.json"
        write_report(payload, path)
        first = path.read_bytes()
        write_report(payload, path)
        assert path.read_bytes() == first
        assert not list(tmp_path.glob("*.tmp"))

    def test_render_table(self):
        payload = {
            "table": "regime_comparison",
            "rows": [{"label": "PT&FT", "median_bleu": 88.5, "per_seed": [88.5, 90.0]}],
        }
        out = render_table(payload)
        assert "PT&FT: 88.50" in out
