"""Run configuration: a JSON file validated before any long work starts."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ContractViolation
from .recipes import DeskBenchConfig


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: str = "fstkit-out"
    workers: int = 1
    provider: str = "mock-strong"
    provider_endpoint: str | None = None
    cache_path: str | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    bench: DeskBenchConfig = field(default_factory=DeskBenchConfig)


_BENCH_FIELDS = {f.name: f.type for f in dataclasses.fields(DeskBenchConfig)}
_TOP_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config(path) -> RunConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ContractViolation(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ContractViolation(f"config is not valid JSON: {exc}")
    return config_from_dict(payload)


def config_from_dict(payload: dict) -> RunConfig:
    if not isinstance(payload, dict):
        raise ContractViolation("config root must be a JSON object")
    unknown = set(payload) - _TOP_FIELDS
    if unknown:
        raise ContractViolation(f"unknown config keys: {sorted(unknown)}")
    bench_payload = payload.get("bench", {})
    if not isinstance(bench_payload, dict):
        raise ContractViolation("config.bench must be an object")
    bad = set(bench_payload) - set(_BENCH_FIELDS)
    if bad:
        raise ContractViolation(f"unknown bench keys: {sorted(bad)}")
    if "seeds" in bench_payload:
        bench_payload = dict(bench_payload, seeds=tuple(bench_payload["seeds"]))
    bench = DeskBenchConfig(**bench_payload)
    kwargs = {k: v for k, v in payload.items() if k != "bench"}
    cfg = RunConfig(bench=bench, **kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.workers < 1:
        raise ContractViolation("workers must be >= 1")
    if not (0.0 <= cfg.bench.sigma <= 1.0):
        raise ContractViolation("bench.sigma outside [0, 1]")
    if not (0.0 <= cfg.bench.formal_threshold <= 1.0):
        raise ContractViolation("bench.formal_threshold outside [0, 1]")
    for key, value in cfg.inputs.items():
        if not Path(value).exists():
            raise ContractViolation(f"configured input {key!r} does not exist: {value}")


def validate_config(path) -> RunConfig:
    return load_config(path)
