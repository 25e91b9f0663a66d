"""HTTP server hosting the annotation UI and its JSON API.

Endpoints:
  GET  /api/items/next?annotator=ID  next item the annotator has not fully
                                     rated, or a completion marker
  POST /api/ratings                  append one rating record (201; 400 on
                                     malformed bodies, 409 on duplicates)
  GET  /api/progress?annotator=ID    items fully rated / total items
  GET  /...                          static UI bundle

The ratings store is append-only JSON-lines with a single writer lock; the
hidden system key is never loaded, so the server cannot leak it.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import ContractViolation
from .evaluation import (
    N_SYSTEMS,
    HumanEvalItem,
    RatingRecord,
    load_items,
    load_ratings,
    rating_from_json,
    rating_to_json,
)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


class RatingStore:
    """Append-only rating log with duplicate detection, one writer at a time."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seen: set[tuple[str, int, int]] = set()
        for record in load_ratings(self.path) if self.path.exists() else []:
            self._seen.add((record.annotator, record.item_id, record.display_index))

    @staticmethod
    def _key(record: RatingRecord) -> tuple[str, int, int]:
        return (record.annotator, record.item_id, record.display_index)

    def add(self, record: RatingRecord) -> bool:
        """Append the record; False when this (annotator, item, output) was
        already rated."""
        key = self._key(record)
        with self._lock:
            if key in self._seen:
                return False
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rating_to_json(record)) + "\n")
            self._seen.add(key)
            return True

    def rated_displays(self, annotator: str, item_id: int) -> set[int]:
        with self._lock:
            return {d for a, i, d in self._seen if a == annotator and i == item_id}

    def items_completed(self, annotator: str, item_ids: list[int]) -> int:
        with self._lock:
            done = 0
            for item_id in item_ids:
                rated = {d for a, i, d in self._seen if a == annotator and i == item_id}
                if len(rated) >= N_SYSTEMS:
                    done += 1
            return done

    def record_count(self, annotator: str) -> int:
        with self._lock:
            return sum(1 for a, _, _ in self._seen if a == annotator)


class AnnotationApp:
    """Request-handling logic, separated from the HTTP plumbing for tests."""

    def __init__(self, items: list[HumanEvalItem], store: RatingStore, ui_dir=None):
        self.items = sorted(items, key=lambda it: it.id)
        self.store = store
        self.ui_dir = Path(ui_dir) if ui_dir else None

    def next_item(self, annotator: str) -> dict:
        total = len(self.items)
        for item in self.items:
            rated = self.store.rated_displays(annotator, item.id)
            if len(rated) < N_SYSTEMS:
                return {
                    "done": False,
                    "item": {
                        "id": item.id,
                        "source": item.source,
                        "outputs": [
                            {"display_index": d, "text": t} for d, t in item.outputs
                        ],
                        "rated_display_indices": sorted(rated),
                    },
                    "progress": self.progress(annotator),
                }
        return {"done": True, "progress": self.progress(annotator)}

    def progress(self, annotator: str) -> dict:
        """rated/total count fully rated items; records counts single
        rating submissions, which advances on every accepted POST."""
        ids = [it.id for it in self.items]
        return {
            "rated": self.store.items_completed(annotator, ids),
            "total": len(ids),
            "records": self.store.record_count(annotator),
        }

    def submit(self, payload: dict) -> tuple[int, dict]:
        try:
            record = rating_from_json(payload)
        except ContractViolation as exc:
            return 400, {"error": str(exc)}
        if record.item_id not in {it.id for it in self.items}:
            return 400, {"error": f"unknown item_id {record.item_id}"}
        if not self.store.add(record):
            return 409, {
                "error": "already rated",
                "annotator": record.annotator,
                "item_id": record.item_id,
                "display_index": record.display_index,
            }
        return 201, {"status": "stored"}


def _make_handler(app: AnnotationApp):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            pass

        def _send_json(self, status: int, payload: dict):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            url = urlparse(self.path)
            query = parse_qs(url.query)
            if url.path == "/api/items/next":
                annotator = query.get("annotator", [""])[0]
                if not annotator:
                    return self._send_json(400, {"error": "annotator query parameter required"})
                return self._send_json(200, app.next_item(annotator))
            if url.path == "/api/progress":
                annotator = query.get("annotator", [""])[0]
                if not annotator:
                    return self._send_json(400, {"error": "annotator query parameter required"})
                return self._send_json(200, app.progress(annotator))
            return self._serve_static(url.path)

        def do_POST(self):
            url = urlparse(self.path)
            if url.path != "/api/ratings":
                return self._send_json(404, {"error": "not found"})
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                return self._send_json(400, {"error": "body is not valid JSON"})
            status, response = app.submit(payload)
            return self._send_json(status, response)

        def _serve_static(self, path: str):
            if app.ui_dir is None:
                return self._send_json(404, {"error": "no UI bundle configured"})
            rel = path.lstrip("/") or "index.html"
            target = (app.ui_dir / rel).resolve()
            if not str(target).startswith(str(app.ui_dir.resolve())) or not target.is_file():
                return self._send_json(404, {"error": "not found"})
            body = target.read_bytes()
            self.send_response(200)
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def make_server(items_path, ratings_path, port: int, ui_dir=None) -> ThreadingHTTPServer:
    items = load_items(items_path)
    store = RatingStore(ratings_path)
    app = AnnotationApp(items, store, ui_dir=ui_dir)
    return ThreadingHTTPServer(("127.0.0.1", port), _make_handler(app))


def serve_annotation(items_path, ratings_path, port: int, ui_dir=None) -> None:
    server = make_server(items_path, ratings_path, port, ui_dir=ui_dir)
    try:
        server.serve_forever()
    finally:
        server.server_close()
