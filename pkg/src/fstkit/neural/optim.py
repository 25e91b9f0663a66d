"""Adam optimizer and learning-rate schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from .tensor import Tensor


@dataclass
class LrSchedule:
    base: float
    warmup: int = 1
    mode: str = "warmup_inverse_sqrt"

    def __post_init__(self):
        if self.base <= 0:
            raise ContractViolation("schedule base rate must be > 0")
        if self.warmup < 1:
            raise ContractViolation("warmup must be >= 1")
        if self.mode not in ("warmup_inverse_sqrt", "constant"):
            raise ContractViolation(f"unknown schedule mode {self.mode!r}")


def lr_at(schedule: LrSchedule, step: int) -> float:
    """Learning rate at a 1-based step: linear warmup, then inverse-sqrt decay."""
    if step < 1:
        raise ContractViolation("step must be >= 1")
    if schedule.mode == "constant":
        return schedule.base
    return schedule.base * min(step / schedule.warmup, math.sqrt(schedule.warmup / step))


@dataclass
class AdamState:
    """First/second moment estimates per parameter, plus the step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> None:
    """One Adam update with bias correction, applied in place."""
    for name, p in params.items():
        if name in grads and grads[name].shape != p.data.shape:
            raise ContractViolation(
                f"adam_step: gradient shape {grads[name].shape} does not match parameter "
                f"{name} of shape {p.data.shape}"
            )
    state.t += 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.data)
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        g = g * g
        g *= 1.0 - b2
        v += g
        denom = v / bc2
        np.sqrt(denom, out=denom)
        denom += eps
        update = m / bc1
        update /= denom
        update *= lr
        p.data -= update


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm."""
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    norm = math.sqrt(total)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def collect_grads(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {name: p.grad.copy() for name, p in params.items() if p.grad is not None}


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None
