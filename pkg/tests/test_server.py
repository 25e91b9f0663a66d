import json
import threading

import pytest
import requests

from fstkit.evaluation import build_humaneval_batch, save_items, save_key
from fstkit.server import make_server
from fstkit.textdata import Sentence


@pytest.fixture()
def served(tmp_path):
    inputs = [Sentence(f"source sentence {i}") for i in range(5)]
    outputs = {
        f"sys_{k}": [Sentence(f"output {k} {i}") for i in range(5)] for k in "abcd"
    }
    items, key = build_humaneval_batch(inputs, outputs, 5, seed=0)
    items_path = tmp_path / "items.json"
    ratings_path = tmp_path / "ratings.jsonl"
    save_items(items, items_path)
    save_key(key, tmp_path / "key.json")
    server = make_server(items_path, ratings_path, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base, ratings_path, items
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


def rating_body(item_id, display_index, annotator="ann1", **scores):
    body = {
        "annotator": annotator,
        "item_id": item_id,
        "display_index": display_index,
        "formality": 2,
        "fluency": 1,
        "meaning": 2,
    }
    body.update(scores)
    return body


class TestNextAndProgress:
    def test_fresh_store_returns_lowest_id(self, served):
        base, _, items = served
        response = requests.get(f"{base}/api/items/next", params={"annotator": "ann1"})
        assert response.status_code == 200
        payload = response.json()
        assert payload["done"] is False
        assert payload["item"]["id"] == min(it.id for it in items)
        assert payload["progress"] == {"rated": 0, "total": 5, "records": 0}

    def test_progress_counts_fully_rated_items(self, served):
        base, _, _ = served
        for display in range(4):
            response = requests.post(f"{base}/api/ratings", json=rating_body(0, display))
            assert response.status_code == 201
        progress = requests.get(f"{base}/api/progress", params={"annotator": "ann1"}).json()
        assert progress == {"rated": 1, "total": 5, "records": 4}
        nxt = requests.get(f"{base}/api/items/next", params={"annotator": "ann1"}).json()
        assert nxt["item"]["id"] == 1

    def test_partial_item_resumes(self, served):
        base, _, _ = served
        requests.post(f"{base}/api/ratings", json=rating_body(0, 0))
        nxt = requests.get(f"{base}/api/items/next", params={"annotator": "ann1"}).json()
        assert nxt["item"]["id"] == 0
        assert nxt["item"]["rated_display_indices"] == [0]

    def test_annotators_independent(self, served):
        base, _, _ = served
        for display in range(4):
            requests.post(f"{base}/api/ratings", json=rating_body(0, display, annotator="ann1"))
        nxt2 = requests.get(f"{base}/api/items/next", params={"annotator": "ann2"}).json()
        assert nxt2["item"]["id"] == 0

    def test_missing_annotator_param(self, served):
        base, _, _ = served
        assert requests.get(f"{base}/api/items/next").status_code == 400

    def test_completion_marker(self, served):
        base, _, _ = served
        for item_id in range(5):
            for display in range(4):
                requests.post(f"{base}/api/ratings", json=rating_body(item_id, display))
        payload = requests.get(f"{base}/api/items/next", params={"annotator": "ann1"}).json()
        assert payload["done"] is True
        assert payload["progress"] == {"rated": 5, "total": 5, "records": 20}


class TestSubmit:
    def test_each_post_increments_record_count(self, served):
        base, _, _ = served
        before = requests.get(f"{base}/api/progress", params={"annotator": "ann1"}).json()
        assert requests.post(f"{base}/api/ratings", json=rating_body(0, 0)).status_code == 201
        after = requests.get(f"{base}/api/progress", params={"annotator": "ann1"}).json()
        assert after["records"] == before["records"] + 1

    def test_valid_rating_appended(self, served):
        base, ratings_path, _ = served
        response = requests.post(f"{base}/api/ratings", json=rating_body(2, 3))
        assert response.status_code == 201
        lines = ratings_path.read_text().splitlines()
        assert len(lines) == 1
        stored = json.loads(lines[0])
        assert stored["item_id"] == 2
        assert stored["display_index"] == 3

    def test_out_of_range_rating_rejected(self, served):
        base, ratings_path, _ = served
        response = requests.post(f"{base}/api/ratings", json=rating_body(0, 0, formality=3))
        assert response.status_code == 400
        assert "formality" in response.json()["error"]
        assert not ratings_path.exists() or ratings_path.read_text() == ""

    def test_duplicate_conflict(self, served):
        base, _, _ = served
        assert requests.post(f"{base}/api/ratings", json=rating_body(1, 1)).status_code == 201
        dup = requests.post(f"{base}/api/ratings", json=rating_body(1, 1, fluency=0))
        assert dup.status_code == 409

    def test_unknown_item_rejected(self, served):
        base, _, _ = served
        assert requests.post(f"{base}/api/ratings", json=rating_body(99, 0)).status_code == 400

    def test_malformed_json(self, served):
        base, _, _ = served
        response = requests.post(
            f"{base}/api/ratings", data=b"{not json", headers={"Content-Type": "application/json"}
        )
        assert response.status_code == 400

    def test_missing_field_named(self, served):
        base, _, _ = served
        body = rating_body(0, 0)
        del body["meaning"]
        response = requests.post(f"{base}/api/ratings", json=body)
        assert response.status_code == 400
        assert "meaning" in response.json()["error"]


class TestConcurrentWrites:
    def test_parallel_submissions_all_stored(self, served):
        base, ratings_path, _ = served
        bodies = [
            rating_body(item, display, annotator=ann)
            for item in range(5)
            for display in range(4)
            for ann in ("ann1", "ann2")
        ]
        errors = []

        def post(body):
            r = requests.post(f"{base}/api/ratings", json=body)
            if r.status_code != 201:
                errors.append(r.status_code)

        threads = [threading.Thread(target=post, args=(b,)) for b in bodies]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        lines = ratings_path.read_text().splitlines()
        assert len(lines) == 40
        parsed = [json.loads(line) for line in lines]
        keys = {(p["annotator"], p["item_id"], p["display_index"]) for p in parsed}
        assert len(keys) == 40


class TestHiddenKeyNeverServed:
    def test_no_endpoint_exposes_key(self, served):
        base, _, _ = served
        nxt = requests.get(f"{base}/api/items/next", params={"annotator": "a"}).json()
        assert "sys_a" not in json.dumps(nxt)
        assert requests.get(f"{base}/key.json").status_code == 404
        assert requests.get(f"{base}/../key.json").status_code in (400, 404)


class TestStaticUi:
    def test_serves_bundle(self, tmp_path):
        inputs = [Sentence("src one")]
        outputs = {f"s{k}": [Sentence(f"o{k}")] for k in "abcd"}
        items, _ = build_humaneval_batch(inputs, outputs, 1, seed=0)
        items_path = tmp_path / "items.json"
        save_items(items, items_path)
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>annotate</body></html>")
        server = make_server(items_path, tmp_path / "r.jsonl", port=0, ui_dir=ui)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            response = requests.get(base + "/")
            assert response.status_code == 200
            assert "annotate" in response.text
            assert requests.get(base + "/missing.js").status_code == 404
        finally:
            server.shutdown()
            server.server_close()
