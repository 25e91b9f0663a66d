"""Versioned JSON checkpoints for named parameter sets.

Values are written through repr-style float serialization, which round-trips
64-bit floats exactly, so a reloaded model reproduces forward passes
bit for bit.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from ..errors import ContractViolation
from .tensor import Tensor

FORMAT_VERSION = 1


def save_checkpoint(path, params: dict[str, Tensor], meta: dict | None = None) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "meta": meta or {},
        "params": {
            name: {"shape": list(p.data.shape), "values": p.data.ravel().tolist()}
            for name, p in params.items()
        },
    }
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[dict[str, Tensor], dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != FORMAT_VERSION:
        raise ContractViolation(f"unsupported checkpoint version {payload.get('version')!r}")
    params = {}
    for name, entry in payload["params"].items():
        arr = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
        t = Tensor(arr)
        t.requires_grad = True
        params[name] = t
    return params, payload.get("meta", {})
