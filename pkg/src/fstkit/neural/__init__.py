"""Minimal reverse-mode differentiable kernel: tensors, layers, Adam, schedules."""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import grad_check
from .layers import (
    additive_attention,
    conv1d,
    conv1d_bank,
    cross_entropy,
    cross_entropy_logits,
    dense,
    dropout,
    embedding_lookup,
    gru_cell,
    init_uniform,
    max_pool_over_time,
    zeros_param,
)
from .optim import AdamState, LrSchedule, adam_step, clip_global_norm, collect_grads, lr_at, zero_grads
from .tensor import Tensor, concat, matmul, mean, reshape, softmax, tanh, tsum

__all__ = [
    "AdamState",
    "LrSchedule",
    "Tensor",
    "adam_step",
    "additive_attention",
    "clip_global_norm",
    "collect_grads",
    "concat",
    "conv1d",
    "conv1d_bank",
    "cross_entropy",
    "cross_entropy_logits",
    "dense",
    "dropout",
    "embedding_lookup",
    "grad_check",
    "gru_cell",
    "init_uniform",
    "load_checkpoint",
    "lr_at",
    "matmul",
    "max_pool_over_time",
    "mean",
    "reshape",
    "save_checkpoint",
    "softmax",
    "tanh",
    "tsum",
    "zero_grads",
    "zeros_param",
]
