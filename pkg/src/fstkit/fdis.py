"""Formality discrimination: round-trip translation plus threshold filtering.

Sentences are translated to a pivot language and back through a pluggable
provider; a pair is kept when the discriminator-measured formality gain
p(rewrite) - p(original) reaches the threshold sigma (non-strict). Three
deterministic offline mocks of graded strength stand in for an online
translation service; a real provider speaks a small HTTP JSON protocol.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .discriminator import DiscriminatorModel, score_formality
from .errors import ContractViolation, ProviderContractError, ProviderTransportError
from .textdata import (
    FILLERS,
    INFORMAL_WORD_MAP,
    PIVOTS,
    Corpus,
    ParallelDataset,
    ParallelPair,
    Sentence,
)


@dataclass
class FdisConfig:
    sigma: float = 0.6
    pivots: tuple[str, ...] = ("fr", "de", "zh")
    batch_size: int = 32
    cache_path: str | None = None
    retry_limit: int = 2
    max_in_flight: int = 1
    requests_per_second: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.sigma <= 1.0):
            raise ContractViolation(f"sigma {self.sigma} outside [0, 1]")
        if self.max_in_flight < 1:
            raise ContractViolation("max_in_flight must be >= 1")


@dataclass
class RoundTripCandidate:
    original: Sentence
    rewrite: Sentence
    pivot: str
    p_original: float | None = None
    p_rewrite: float | None = None


@dataclass
class RoundTripStats:
    attempted: int = 0
    succeeded: int = 0
    skipped: int = 0
    provider_calls: int = 0
    cache_hits: int = 0

    def __post_init__(self):
        self._lock = threading.Lock()

    def count_call(self) -> None:
        with self._lock:
            self.provider_calls += 1


class IdentityProvider:
    """Returns inputs unchanged; useful as a null provider in tests."""

    id = "identity"

    def translate(self, texts, source_lang, target_lang):
        return list(texts)


_INVERSE_WORD_MAP = {v: k for k, v in INFORMAL_WORD_MAP.items()}


def _stable_unit(*parts: str) -> float:
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


class MockRuleProvider:
    """Deterministic offline stand-in for an online translator.

    The forward hop (en -> pivot) passes text through unchanged; the return
    hop applies the inverse of the synthetic informalization rules. Each
    applicable rule fires iff a stable hash of (provider, pivot, text, rule)
    falls under the provider's strength, so strong/medium/weak providers
    restore 100%/60%/30% of the formal surface.
    """

    def __init__(self, strength: float, id: str):
        if not (0.0 < strength <= 1.0):
            raise ContractViolation("strength must be in (0, 1]")
        self.strength = strength
        self.id = id

    def _fires(self, pivot: str, text: str, rule: str) -> bool:
        if self.strength >= 1.0:
            return True
        return _stable_unit(self.id, pivot, text, rule) < self.strength

    def _formalize(self, text: str, pivot: str) -> str:
        words = []
        for i, w in enumerate(text.split()):
            if w in _INVERSE_WORD_MAP and self._fires(pivot, text, f"map:{i}:{w}"):
                words.append(_INVERSE_WORD_MAP[w])
            elif w in FILLERS and self._fires(pivot, text, f"filler:{i}"):
                continue
            elif w == "i" and self._fires(pivot, text, f"pronoun:{i}"):
                words.append("I")
            else:
                words.append(w)
        if words and self._fires(pivot, text, "capitalize"):
            words[0] = words[0][:1].upper() + words[0][1:]
        out = " ".join(words)
        if out and out[-1] not in ".?!" and self._fires(pivot, text, "period"):
            out += "."
        return out

    def translate(self, texts, source_lang, target_lang):
        if target_lang == "en":
            return [self._formalize(t, source_lang) for t in texts]
        return list(texts)


class HttpProvider:
    """Client for the wire protocol: POST {endpoint}/translate with a JSON
    body {"texts", "source_lang", "target_lang"} returning {"translations"}.
    Any non-200 response or transport problem raises ProviderTransportError.
    """

    def __init__(self, endpoint: str, id: str = "http", timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.id = id
        self.timeout = timeout

    def translate(self, texts, source_lang, target_lang):
        import requests

        try:
            resp = requests.post(
                self.endpoint + "/translate",
                json={"texts": list(texts), "source_lang": source_lang, "target_lang": target_lang},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderTransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise ProviderTransportError(f"HTTP {resp.status_code} from {self.endpoint}")
        try:
            return resp.json()["translations"]
        except (ValueError, KeyError) as exc:
            raise ProviderContractError(f"malformed provider response: {exc}") from exc


def make_provider(name: str, endpoint: str | None = None):
    if name == "identity":
        return IdentityProvider()
    if name == "mock-strong":
        return MockRuleProvider(1.0, name)
    if name == "mock-medium":
        return MockRuleProvider(0.6, name)
    if name == "mock-weak":
        return MockRuleProvider(0.3, name)
    if name == "http":
        if not endpoint:
            raise ContractViolation("http provider requires an endpoint URL")
        return HttpProvider(endpoint)
    raise ContractViolation(f"unknown provider {name!r}")


class TranslationCache:
    """Append-only JSON-lines cache keyed by (provider id, pivot, text)."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    entry = json.loads(line)
                    self._entries[entry["key"]] = entry["rewrite"]

    @staticmethod
    def key_for(provider_id: str, pivot: str, text: str) -> str:
        return hashlib.sha256(f"{provider_id}|{pivot}|{text}".encode("utf-8")).hexdigest()

    def get(self, provider_id: str, pivot: str, text: str) -> str | None:
        return self._entries.get(self.key_for(provider_id, pivot, text))

    def put(self, provider_id: str, pivot: str, text: str, rewrite: str) -> None:
        key = self.key_for(provider_id, pivot, text)
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = rewrite
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {"key": key, "provider": provider_id, "pivot": pivot,
                         "text": text, "rewrite": rewrite},
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    def __len__(self) -> int:
        return len(self._entries)


class TokenBucket:
    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(rate, 1.0)
        self.tokens = self.capacity
        self.stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.stamp) * self.rate)
                self.stamp = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


def _call_provider(provider, stats, limiter, texts, source_lang, target_lang):
    if limiter is not None:
        limiter.acquire()
    stats.count_call()
    out = provider.translate(texts, source_lang, target_lang)
    if len(out) != len(texts):
        raise ProviderContractError(
            f"provider {provider.id!r} returned {len(out)} translations for {len(texts)} inputs"
        )
    return out


def _round_trip_texts(provider, stats, limiter, texts, pivot, retry_limit):
    """Round-trip one batch; returns per-text rewrites with None for failures.

    Transport failures retry the whole batch, then fall back to per-item
    requests so one poisoned text cannot sink its batch mates.
    """
    for _ in range(retry_limit + 1):
        try:
            mid = _call_provider(provider, stats, limiter, texts, "en", pivot)
            back = _call_provider(provider, stats, limiter, mid, pivot, "en")
            return list(back)
        except ProviderTransportError:
            continue
    if len(texts) == 1:
        return [None]
    results = []
    for text in texts:
        results.extend(_round_trip_texts(provider, stats, limiter, [text], pivot, retry_limit))
    return results


def round_trip(
    provider, corpus: Corpus, pivot: str, config: FdisConfig | None = None
) -> tuple[list[tuple[Sentence, Sentence]], RoundTripStats]:
    """Translate each sentence en -> pivot -> en.

    Results come back in corpus order for the sentences that succeeded.
    Rewrites are cached by (provider id, pivot, text): repeated texts and
    reruns over the same corpus issue no further provider calls.
    """
    cfg = config or FdisConfig()
    stats = RoundTripStats(attempted=len(corpus.sentences))
    cache = TranslationCache(cfg.cache_path) if cfg.cache_path else None
    limiter = TokenBucket(cfg.requests_per_second) if cfg.requests_per_second else None

    resolved: dict[str, str | None] = {}
    pending: list[str] = []
    for s in corpus.sentences:
        if s.text in resolved or s.text in pending:
            continue
        if cache is not None:
            hit = cache.get(provider.id, pivot, s.text)
            if hit is not None:
                resolved[s.text] = hit
                stats.cache_hits += 1
                continue
        pending.append(s.text)

    batches = [pending[i : i + cfg.batch_size] for i in range(0, len(pending), cfg.batch_size)]

    def work(batch):
        return _round_trip_texts(provider, stats, limiter, batch, pivot, cfg.retry_limit)

    if cfg.max_in_flight > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            outs = list(pool.map(work, batches))
    else:
        outs = [work(b) for b in batches]
    for batch, out in zip(batches, outs):
        for text, rewrite in zip(batch, out):
            resolved[text] = rewrite
            if rewrite is not None and cache is not None:
                cache.put(provider.id, pivot, text, rewrite)

    pairs: list[tuple[Sentence, Sentence]] = []
    for s in corpus.sentences:
        rewrite = resolved.get(s.text)
        if rewrite is None or not rewrite.strip():
            stats.skipped += 1
            continue
        pairs.append((s, Sentence(rewrite)))
        stats.succeeded += 1
    return pairs, stats


def score_candidates(
    pairs: list[tuple[Sentence, Sentence]], pivot: str, model: DiscriminatorModel
) -> list[RoundTripCandidate]:
    return [
        RoundTripCandidate(
            original=orig,
            rewrite=rew,
            pivot=pivot,
            p_original=score_formality(model, orig),
            p_rewrite=score_formality(model, rew),
        )
        for orig, rew in pairs
    ]


def select_by_gain(candidates: list[RoundTripCandidate], sigma: float) -> list[RoundTripCandidate]:
    """The selection rule itself: keep iff p(rewrite) - p(original) >= sigma."""
    kept = []
    for c in candidates:
        if c.p_original is None or c.p_rewrite is None:
            raise ContractViolation("candidate is missing formality scores")
        if c.p_rewrite - c.p_original >= sigma:
            kept.append(c)
    return kept


def filter_by_formality(
    candidates,
    model: DiscriminatorModel,
    sigma: float,
    pivot: str | None = None,
) -> ParallelDataset:
    """Score and threshold round-trip candidates into an augmented dataset.

    Accepts (original, rewrite) pairs plus a pivot, or pre-scored
    RoundTripCandidates. Identity rewrites are dropped before scoring; a
    zero gain cannot pass any positive sigma.
    """
    items: list[RoundTripCandidate] = []
    for c in candidates:
        if isinstance(c, RoundTripCandidate):
            items.append(c)
        else:
            orig, rew = c
            if pivot is None:
                raise ContractViolation("pivot required for unscored (original, rewrite) pairs")
            items.append(RoundTripCandidate(original=orig, rewrite=rew, pivot=pivot))
    attempted = len(items)
    items = [c for c in items if c.original.text != c.rewrite.text]
    for c in items:
        if c.p_original is None:
            c.p_original = score_formality(model, c.original)
        if c.p_rewrite is None:
            c.p_rewrite = score_formality(model, c.rewrite)
    kept = select_by_gain(items, sigma)
    pair_pivot = pivot if pivot is not None else (kept[0].pivot if kept else (items[0].pivot if items else "fr"))
    pairs = [
        ParallelPair(
            source=c.original,
            target=c.rewrite,
            provenance="fdis",
            pivot=c.pivot,
            source_score=c.p_original,
            target_score=c.p_rewrite,
        )
        for c in kept
    ]
    return ParallelDataset(
        pairs,
        metadata={
            "method": "fdis",
            "pivot": pair_pivot,
            "sigma": repr(sigma),
            "attempted": str(attempted),
            "kept": str(len(pairs)),
        },
    )


@dataclass
class PivotRow:
    pivot: str
    kept: int
    attempted: int
    mean_gain: float | None


@dataclass
class PivotReport:
    rows: list[PivotRow] = field(default_factory=list)

    def render(self) -> str:
        lines = ["sizes:"]
        lines += [f"{r.pivot} {r.kept}" for r in self.rows]
        lines.append("details:")
        for r in self.rows:
            ratio = r.kept / r.attempted if r.attempted else 0.0
            gain = "n/a" if r.mean_gain is None else f"{r.mean_gain:.4f}"
            lines.append(
                f"{r.pivot} kept={r.kept} attempted={r.attempted} "
                f"acceptance={ratio:.4f} mean_gain={gain}"
            )
        return "\n".join(lines) + "\n"


def pivot_report(datasets: dict[str, ParallelDataset]) -> PivotReport:
    """Per-pivot sizes, acceptance ratios, and mean formality gain."""
    rows = []
    order = [p for p in PIVOTS if p in datasets] + sorted(set(datasets) - set(PIVOTS))
    for pivot in order:
        ds = datasets[pivot]
        gains = [
            p.target_score - p.source_score
            for p in ds.pairs
            if p.source_score is not None and p.target_score is not None
        ]
        rows.append(
            PivotRow(
                pivot=pivot,
                kept=len(ds.pairs),
                attempted=int(ds.metadata.get("attempted", len(ds.pairs))),
                mean_gain=(sum(gains) / len(gains)) if gains else None,
            )
        )
    return PivotReport(rows=rows)
