"""Dense float64 tensors with reverse-mode automatic differentiation.

Every value is a numpy float64 array wrapped in a :class:`Tensor`. Ops build
a DAG; calling ``backward()`` on a scalar result walks the graph once in
reverse topological order and accumulates gradients into the leaves that were
created with ``requires_grad=True``.

Shapes are explicit everywhere. The single broadcast this module performs is
adding a length-n bias vector to every row of an (m, n) matrix; anything else
with mismatched shapes raises :class:`ShapeError` naming the op and shapes.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class ShapeError(ValueError):
    """An op received tensors whose shapes do not fit together."""


class Tensor:
    """A float64 array plus the bookkeeping needed for ``backward()``."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return self.data.item()

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Run reverse-mode accumulation from this scalar.

        Raises ShapeError if the tensor is not a single value: gradients are
        only defined here for a scalar objective.
        """
        if self.data.size != 1:
            raise ShapeError(f"backward() needs a scalar, got shape {self.shape}")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward()

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)


def _result(data: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _accumulate(t: Tensor, grad: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += grad


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product for (m,k)@(k,n), (k,)@(k,n) and (m,k)@(k,)."""
    ad, bd = a.data, b.data
    ok = (
        (ad.ndim == 2 and bd.ndim == 2 and ad.shape[1] == bd.shape[0])
        or (ad.ndim == 1 and bd.ndim == 2 and ad.shape[0] == bd.shape[0])
        or (ad.ndim == 2 and bd.ndim == 1 and ad.shape[1] == bd.shape[0])
    )
    if not ok:
        raise ShapeError(f"matmul: incompatible shapes {ad.shape} and {bd.shape}")
    out = _result(ad @ bd, (a, b), None)

    def backward():
        g = out.grad
        if a.requires_grad:
            if ad.ndim == 2 and bd.ndim == 2:
                _accumulate(a, g @ bd.T)
            elif ad.ndim == 1:
                _accumulate(a, bd @ g)
            else:
                _accumulate(a, np.outer(g, bd))
        if b.requires_grad:
            if ad.ndim == 2 and bd.ndim == 2:
                _accumulate(b, ad.T @ g)
            elif ad.ndim == 1:
                _accumulate(b, np.outer(ad, g))
            else:
                _accumulate(b, ad.T @ g)

    out._backward = backward if out.requires_grad else None
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; also (m,n) + (n,) which adds b to every row of a."""
    ad, bd = a.data, b.data
    row_bias = ad.ndim == 2 and bd.ndim == 1 and ad.shape[1] == bd.shape[0]
    if not row_bias and ad.shape != bd.shape:
        raise ShapeError(f"add: incompatible shapes {ad.shape} and {bd.shape}")
    out = _result(ad + bd, (a, b), None)

    def backward():
        g = out.grad
        if a.requires_grad:
            _accumulate(a, g)
        if b.requires_grad:
            _accumulate(b, g.sum(axis=0) if row_bias else g)

    out._backward = backward if out.requires_grad else None
    return out


def add_n(tensors: Sequence[Tensor]) -> Tensor:
    """Sum of same-shape tensors."""
    if not tensors:
        raise ShapeError("add_n: empty input")
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise ShapeError(f"add_n: mixed shapes {shape} and {t.shape}")
    out = _result(sum(t.data for t in tensors), tensors, None)

    def backward():
        for t in tensors:
            if t.requires_grad:
                _accumulate(t, out.grad)

    out._backward = backward if out.requires_grad else None
    return out


def scale(a: Tensor, c: float) -> Tensor:
    """Multiply by a python constant."""
    c = float(c)
    out = _result(a.data * c, (a,), None)

    def backward():
        if a.requires_grad:
            _accumulate(a, out.grad * c)

    out._backward = backward if out.requires_grad else None
    return out


def scale_rows(a: Tensor, factors: np.ndarray) -> Tensor:
    """Multiply row i of the (m, n) matrix a by the constant factors[i]."""
    f = np.asarray(factors, dtype=np.float64)
    if a.ndim != 2 or f.ndim != 1 or f.shape[0] != a.shape[0]:
        raise ShapeError(f"scale_rows: matrix {a.shape} vs factors {f.shape}")
    col = f[:, None]
    out = _result(a.data * col, (a,), None)

    def backward():
        if a.requires_grad:
            _accumulate(a, out.grad * col)

    out._backward = backward if out.requires_grad else None
    return out


def sigmoid(a: Tensor) -> Tensor:
    ad = a.data
    y = np.empty_like(ad)
    pos = ad >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-ad[pos]))
    ea = np.exp(ad[~pos])
    y[~pos] = ea / (1.0 + ea)
    out = _result(y, (a,), None)

    def backward():
        if a.requires_grad:
            _accumulate(a, out.grad * y * (1.0 - y))

    out._backward = backward if out.requires_grad else None
    return out


def relu(a: Tensor) -> Tensor:
    out = _result(np.maximum(a.data, 0.0), (a,), None)

    def backward():
        if a.requires_grad:
            _accumulate(a, out.grad * (a.data > 0.0))

    out._backward = backward if out.requires_grad else None
    return out


def softmax(a: Tensor) -> Tensor:
    """Softmax over a vector, or over each row of a matrix."""
    if a.ndim not in (1, 2):
        raise ShapeError(f"softmax: expected 1-D or 2-D, got {a.shape}")
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)
    out = _result(y, (a,), None)

    def backward():
        if a.requires_grad:
            g = out.grad
            dot = (g * y).sum(axis=-1, keepdims=True)
            _accumulate(a, y * (g - dot))

    out._backward = backward if out.requires_grad else None
    return out


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate vectors (axis 0) or matrices (axis 0 or 1)."""
    if not parts:
        raise ShapeError("concat: empty input")
    ndim = parts[0].ndim
    if any(p.ndim != ndim for p in parts):
        raise ShapeError("concat: mixed ranks " + str([p.shape for p in parts]))
    if ndim == 1 and axis != 0:
        raise ShapeError("concat: vectors only concatenate along axis 0")
    if ndim == 2:
        other = 1 - axis
        width = parts[0].shape[other]
        if any(p.shape[other] != width for p in parts):
            raise ShapeError("concat: mismatched shapes " + str([p.shape for p in parts]))
    out = _result(np.concatenate([p.data for p in parts], axis=axis), parts, None)

    def backward():
        g = out.grad
        offset = 0
        for p in parts:
            size = p.shape[axis]
            sl = [slice(None)] * ndim
            sl[axis] = slice(offset, offset + size)
            if p.requires_grad:
                _accumulate(p, g[tuple(sl)])
            offset += size

    out._backward = backward if out.requires_grad else None
    return out


def take_rows(a: Tensor, rows: Iterable[int]) -> Tensor:
    """Gather rows of a (m, n) matrix; the gradient scatters back into them."""
    idx = np.asarray(list(rows), dtype=np.intp)
    if a.ndim != 2:
        raise ShapeError(f"take_rows: expected a matrix, got {a.shape}")
    if idx.size == 0:
        raise ShapeError("take_rows: empty row list")
    if idx.min() < 0 or idx.max() >= a.shape[0]:
        raise ShapeError(f"take_rows: row index out of range for {a.shape}: {idx}")
    out = _result(a.data[idx], (a,), None)

    def backward():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            np.add.at(a.grad, idx, out.grad)

    out._backward = backward if out.requires_grad else None
    return out


def embedding_lookup(table: Tensor, ids: Iterable[int]) -> Tensor:
    """Look up embedding rows by id. Same mechanics as take_rows."""
    return take_rows(table, ids)


def _pool(a: Tensor, mode: str) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"{mode}_pool_rows: expected a matrix, got {a.shape}")
    if a.shape[0] == 0:
        raise ShapeError(f"{mode}_pool_rows: empty matrix")
    return a


def max_pool_rows(a: Tensor) -> Tensor:
    """Column-wise max over rows: (m, n) -> (n,). Ties go to the first row."""
    _pool(a, "max")
    idx = a.data.argmax(axis=0)
    cols = np.arange(a.shape[1])
    out = _result(a.data[idx, cols], (a,), None)

    def backward():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            np.add.at(a.grad, (idx, cols), out.grad)

    out._backward = backward if out.requires_grad else None
    return out


def avg_pool_rows(a: Tensor) -> Tensor:
    """Column-wise mean over rows: (m, n) -> (n,)."""
    _pool(a, "avg")
    m = a.shape[0]
    out = _result(a.data.mean(axis=0), (a,), None)

    def backward():
        if a.requires_grad:
            _accumulate(a, np.repeat(out.grad[None, :], m, axis=0) / m)

    out._backward = backward if out.requires_grad else None
    return out


def sum_pool_rows(a: Tensor) -> Tensor:
    """Column-wise sum over rows: (m, n) -> (n,)."""
    _pool(a, "sum")
    m = a.shape[0]
    out = _result(a.data.sum(axis=0), (a,), None)

    def backward():
        if a.requires_grad:
            _accumulate(a, np.repeat(out.grad[None, :], m, axis=0))

    out._backward = backward if out.requires_grad else None
    return out


POOLS = {"max": max_pool_rows, "avg": avg_pool_rows, "sum": sum_pool_rows}


def cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean cross-entropy between rows of logits and integer class targets.

    Accepts a (C,) vector with a single int target, or an (m, C) matrix with a
    length-m sequence of ints. Uses the shifted log-sum-exp form, so large
    logits do not overflow. The result is a non-negative scalar.
    """
    if logits.ndim == 1:
        mat = logits.data[None, :]
        tgt = np.asarray([targets], dtype=np.intp)
    elif logits.ndim == 2:
        mat = logits.data
        tgt = np.asarray(list(targets), dtype=np.intp)
    else:
        raise ShapeError(f"cross_entropy: expected 1-D or 2-D logits, got {logits.shape}")
    m, c = mat.shape
    if tgt.shape != (m,):
        raise ShapeError(f"cross_entropy: {m} rows but {tgt.shape[0]} targets")
    if tgt.min() < 0 or tgt.max() >= c:
        raise ShapeError(f"cross_entropy: target out of range for {c} classes: {tgt}")
    zmax = mat.max(axis=1, keepdims=True)
    ez = np.exp(mat - zmax)
    lse = np.log(ez.sum(axis=1)) + zmax[:, 0]
    losses = lse - mat[np.arange(m), tgt]
    out = _result(np.asarray(losses.mean()), (logits,), None)

    def backward():
        if logits.requires_grad:
            probs = ez / ez.sum(axis=1, keepdims=True)
            probs[np.arange(m), tgt] -= 1.0
            g = probs * (float(out.grad) / m)
            _accumulate(logits, g[0] if logits.ndim == 1 else g)

    out._backward = backward if out.requires_grad else None
    return out


def nll(probs: Tensor, target: int) -> Tensor:
    """Negative log of one entry of a probability vector."""
    if probs.ndim != 1:
        raise ShapeError(f"nll: expected a probability vector, got {probs.shape}")
    t = int(target)
    if not 0 <= t < probs.shape[0]:
        raise ShapeError(f"nll: target {t} out of range for {probs.shape[0]} classes")
    p = probs.data[t]
    out = _result(np.asarray(-np.log(p)), (probs,), None)

    def backward():
        if probs.requires_grad:
            g = np.zeros_like(probs.data)
            g[t] = -float(out.grad) / p
            _accumulate(probs, g)

    out._backward = backward if out.requires_grad else None
    return out
