"""Reverse-mode autodiff over float64 numpy arrays.

A Tensor wraps a row-major float64 array plus an optional gradient of the
same shape. Operations record their parents and a backward closure on a
tape; Tensor.backward() walks the tape in reverse topological order.
Heavier layers (convolution, GRU cell, attention) register fused nodes with
hand-derived backward passes in fstkit.neural.layers.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolation


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def values(self) -> np.ndarray:
        """Flat row-major view of the stored values."""
        return self.data.ravel()

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad)
        else:
            self.grad += grad

    def backward(self) -> None:
        if self.data.size != 1:
            raise ContractViolation("backward() requires a scalar loss")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # Operator sugar. Non-Tensor operands are treated as constants.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(_as_tensor(other), _const(-1.0)))

    def __rsub__(self, other):
        return add(_as_tensor(other), mul(self, _const(-1.0)))

    def __neg__(self):
        return mul(self, _const(-1.0))

    def __matmul__(self, other):
        return matmul(self, _as_tensor(other))

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _const(x) -> Tensor:
    return Tensor(np.asarray(x, dtype=np.float64))


def make_node(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    """Create a tape node. `backward(grad)` must accumulate into parents."""
    out = Tensor(data)
    if any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def backward(grad):
        a._accumulate(_unbroadcast(grad, a.data.shape))
        b._accumulate(_unbroadcast(grad, b.data.shape))

    return make_node(data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def backward(grad):
        a._accumulate(_unbroadcast(grad * b.data, a.data.shape))
        b._accumulate(_unbroadcast(grad * a.data, b.data.shape))

    return make_node(data, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ContractViolation("matmul expects 2-D operands")
    if a.data.shape[1] != b.data.shape[0]:
        raise ContractViolation(f"matmul shape mismatch {a.data.shape} @ {b.data.shape}")
    data = a.data @ b.data

    def backward(grad):
        a._accumulate(grad @ b.data.T)
        b._accumulate(a.data.T @ grad)

    return make_node(data, (a, b), backward)


def tanh(x: Tensor) -> Tensor:
    data = np.tanh(x.data)

    def backward(grad):
        x._accumulate(grad * (1.0 - data * data))

    return make_node(data, (x,), backward)


def sigmoid(x: Tensor) -> Tensor:
    data = 1.0 / (1.0 + np.exp(-x.data))

    def backward(grad):
        x._accumulate(grad * data * (1.0 - data))

    return make_node(data, (x,), backward)


def exp(x: Tensor) -> Tensor:
    data = np.exp(x.data)

    def backward(grad):
        x._accumulate(grad * data)

    return make_node(data, (x,), backward)


def log(x: Tensor) -> Tensor:
    data = np.log(x.data)

    def backward(grad):
        x._accumulate(grad / x.data)

    return make_node(data, (x,), backward)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(grad):
        g = grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        x._accumulate(np.broadcast_to(g, x.data.shape).copy())

    return make_node(data, (x,), backward)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = x.data.size if axis is None else x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), _const(1.0 / n))


def reshape(x: Tensor, shape) -> Tensor:
    data = x.data.reshape(shape)

    def backward(grad):
        x._accumulate(grad.reshape(x.data.shape))

    return make_node(data, (x,), backward)


def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(grad):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * grad.ndim
            idx[axis] = slice(lo, hi)
            t._accumulate(grad[tuple(idx)])

    return make_node(data, tuple(tensors), backward)


def narrow(x: Tensor, axis: int, start: int, length: int) -> Tensor:
    """Slice `length` entries from `axis` starting at `start`."""
    idx = [slice(None)] * x.data.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    data = x.data[idx]

    def backward(grad):
        full = np.zeros_like(x.data)
        full[idx] = grad
        x._accumulate(full)

    return make_node(data, (x,), backward)


def gather_rows(x: Tensor, indices: np.ndarray) -> Tensor:
    """Pick rows of a 2-D tensor; backward scatter-adds into the source."""
    indices = np.asarray(indices, dtype=np.int64)
    data = x.data[indices]

    def backward(grad):
        full = np.zeros_like(x.data)
        np.add.at(full, indices.ravel(), grad.reshape(-1, x.data.shape[1]))
        x._accumulate(full)

    return make_node(data, (x,), backward)


def stack_time(tensors: list[Tensor]) -> Tensor:
    """Stack T tensors of shape (B, H) into (B, T, H) as a single node."""
    data = np.stack([t.data for t in tensors], axis=1)

    def backward(grad):
        for i, t in enumerate(tensors):
            t._accumulate(grad[:, i, :])

    return make_node(data, tuple(tensors), backward)


def select_time(x: Tensor, idx: np.ndarray) -> Tensor:
    """Pick one time step per row: (B, T, H) with idx (B,) -> (B, H)."""
    idx = np.asarray(idx, dtype=np.int64)
    rows = np.arange(x.data.shape[0])
    data = x.data[rows, idx]

    def backward(grad):
        full = np.zeros_like(x.data)
        full[rows, idx] = grad
        x._accumulate(full)

    return make_node(data, (x,), backward)


def time_slice(x: Tensor, t: int) -> Tensor:
    """(B, T, H) -> (B, H) at time t."""
    data = x.data[:, t, :]

    def backward(grad):
        full = np.zeros_like(x.data)
        full[:, t, :] = grad
        x._accumulate(full)

    return make_node(data, (x,), backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def backward(grad):
        # d(softmax)/dx applied to grad: s * (grad - sum(grad * s))
        dot = (grad * data).sum(axis=axis, keepdims=True)
        x._accumulate(data * (grad - dot))

    return make_node(data, (x,), backward)
