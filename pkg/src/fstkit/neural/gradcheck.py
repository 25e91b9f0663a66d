"""Central finite-difference gradient checking."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def grad_check(fn, inputs: list[np.ndarray], eps: float = 1e-5) -> float:
    """Compare autodiff gradients of a scalar map against central differences.

    `fn` takes a list of Tensors and returns a scalar Tensor; it must be pure
    (any internal randomness fixed by seed). Returns the maximum relative
    error |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) over every
    coordinate of every input.
    """
    tensors = [Tensor(np.array(x, dtype=np.float64), requires_grad=True) for x in inputs]
    out = fn(tensors)
    out.backward()
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in tensors]

    max_err = 0.0
    for t, a in zip(tensors, analytic):
        flat = t.data.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = fn(tensors).item()
            flat[i] = orig - eps
            down = fn(tensors).item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * eps)
            ana = a.ravel()[i]
            err = abs(ana - numeric) / max(abs(ana), abs(numeric), 1e-8)
            max_err = max(max_err, err)
    return max_err
