"""Dense float64 tensors with reverse-mode automatic differentiation.

The computation graph is the implicit DAG of parent links each op records;
``backward`` walks it once in reverse topological order, accumulates
gradients into ``requires_grad`` leaves, and then marks the interior nodes
consumed so stale graph reuse fails loudly instead of silently dropping
gradients. Broadcasting is limited to a leading batch dimension: (B, n)
against (n,). Every op output is checked for NaN/Inf at the boundary.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


class ShapeMismatch(ValueError):
    """Operands with incompatible shapes."""


class NonFinite(FloatingPointError):
    """A NaN or Inf reached an op boundary."""


class NotScalar(ValueError):
    """backward() called on a non-scalar tensor."""


class GraphConsumed(RuntimeError):
    """A graph node was reused after backward() already consumed it."""


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{op} produced non-finite values")


class Tensor:
    """Immutable value holding a float64 array, optionally tracked for gradients."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_grad_fn", "_consumed")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        _check_finite(arr, "tensor construction")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn = None
        self._consumed = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _result(data: np.ndarray, parents: tuple[Tensor, ...], grad_fn, op: str) -> Tensor:
    for p in parents:
        if p._consumed:
            raise GraphConsumed(f"{op} reuses a tensor from an already-consumed graph")
    out = Tensor(data, requires_grad=any(p.requires_grad for p in parents))
    if out.requires_grad:
        out._parents = parents
        out._grad_fn = grad_fn
    return out


def _batch_compatible(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    # (B, n) against (n,) is the only broadcast this engine allows
    return len(a) == 2 and len(b) == 1 and a[1] == b[0]


def _reduce_to(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return grad.sum(axis=0)


def add(x: Tensor, y: Tensor) -> Tensor:
    if not (x.shape == y.shape or _batch_compatible(x.shape, y.shape) or _batch_compatible(y.shape, x.shape)):
        raise ShapeMismatch(f"add: {x.shape} vs {y.shape}")
    data = x.data + y.data

    def grad_fn(g):
        return _reduce_to(g, x.shape), _reduce_to(g, y.shape)

    return _result(data, (x, y), grad_fn, "add")


def sub(x: Tensor, y: Tensor) -> Tensor:
    if not (x.shape == y.shape or _batch_compatible(x.shape, y.shape) or _batch_compatible(y.shape, x.shape)):
        raise ShapeMismatch(f"sub: {x.shape} vs {y.shape}")
    data = x.data - y.data

    def grad_fn(g):
        return _reduce_to(g, x.shape), _reduce_to(-g, y.shape)

    return _result(data, (x, y), grad_fn, "sub")


def mul(x: Tensor, y: Tensor) -> Tensor:
    if x.shape != y.shape:
        raise ShapeMismatch(f"mul: {x.shape} vs {y.shape}")
    data = x.data * y.data

    def grad_fn(g):
        return g * y.data, g * x.data

    return _result(data, (x, y), grad_fn, "mul")


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    data = x.data * c

    def grad_fn(g):
        return (g * c,)

    return _result(data, (x,), grad_fn, "scale")


def matmul(x: Tensor, y: Tensor) -> Tensor:
    if y.data.ndim != 2 or x.data.ndim not in (1, 2) or x.shape[-1] != y.shape[0]:
        raise ShapeMismatch(f"matmul: {x.shape} vs {y.shape}")
    data = x.data @ y.data

    def grad_fn(g):
        if x.data.ndim == 1:
            return g @ y.data.T, np.outer(x.data, g)
        return g @ y.data.T, x.data.T @ g

    return _result(data, (x, y), grad_fn, "matmul")


def concat(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate along the last axis."""
    parts = tuple(parts)
    if not parts:
        raise ShapeMismatch("concat of zero tensors")
    lead = parts[0].shape[:-1]
    if any(p.shape[:-1] != lead or p.data.ndim != parts[0].data.ndim for p in parts):
        raise ShapeMismatch(f"concat: incompatible shapes {[p.shape for p in parts]}")
    data = np.concatenate([p.data for p in parts], axis=-1)
    offsets = np.cumsum([p.shape[-1] for p in parts])[:-1]

    def grad_fn(g):
        return tuple(np.split(g, offsets, axis=-1))

    return _result(data, parts, grad_fn, "concat")


def relu(x: Tensor) -> Tensor:
    data = np.maximum(x.data, 0.0)

    def grad_fn(g):
        return (g * (x.data > 0.0),)

    return _result(data, (x,), grad_fn, "relu")


def tanh(x: Tensor) -> Tensor:
    data = np.tanh(x.data)

    def grad_fn(g):
        return (g * (1.0 - data * data),)

    return _result(data, (x,), grad_fn, "tanh")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def mish_np(x: np.ndarray) -> np.ndarray:
    return x * np.tanh(np.logaddexp(0.0, x))


def mish(x: Tensor) -> Tensor:
    sp = np.logaddexp(0.0, x.data)
    t = np.tanh(sp)
    data = x.data * t

    def grad_fn(g):
        return (g * (t + x.data * (1.0 - t * t) * _sigmoid(x.data)),)

    return _result(data, (x,), grad_fn, "mish")


def sum_all(x: Tensor) -> Tensor:
    data = np.asarray(x.data.sum())

    def grad_fn(g):
        return (np.broadcast_to(g, x.shape).astype(np.float64),)

    return _result(data, (x,), grad_fn, "sum_all")


def mse(prediction: Tensor, target: Tensor) -> Tensor:
    """Mean over all elements of squared differences; returns a scalar tensor."""
    if prediction.shape != target.shape:
        raise ShapeMismatch(f"mse: {prediction.shape} vs {target.shape}")
    diff = prediction.data - target.data
    n = diff.size
    data = np.asarray((diff * diff).sum() / n)

    def grad_fn(g):
        base = g * 2.0 * diff / n
        return base, -base

    return _result(data, (prediction, target), grad_fn, "mse")


def backward(loss: Tensor) -> None:
    """Populate .grad on every requires_grad tensor reachable from ``loss``.

    The walked graph is consumed: a second backward, or an op reusing one of
    its interior nodes, raises GraphConsumed until a fresh forward is run.
    """
    if loss.data.shape != ():
        raise NotScalar(f"backward needs a scalar loss, got shape {loss.data.shape}")
    if loss._consumed:
        raise GraphConsumed("backward was already called on this graph")
    if not loss.requires_grad:
        raise ValueError("loss is not connected to any differentiable leaf")

    # iterative postorder so graph depth cannot hit the recursion limit
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    loss.grad = np.ones(())
    for node in reversed(order):
        if node._grad_fn is None or node.grad is None:
            continue
        grads = node._grad_fn(node.grad)
        for parent, g in zip(node._parents, grads):
            if g is None or not parent.requires_grad:
                continue
            if parent.grad is None:
                parent.grad = np.zeros_like(parent.data)
            parent.grad = parent.grad + g
        node._grad_fn = None
        node._parents = ()
        node._consumed = True
