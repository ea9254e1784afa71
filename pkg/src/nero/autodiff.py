"""Dense-array reverse-mode differentiation and AdaGrad.

Just enough machinery for the two networks: float64 arrays, a dynamic
graph of closures, and exact analytic gradients. A backward() call
accumulates into ``grad``; callers zero gradients first (calling twice
without zeroing doubles them by design).
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    pass


class Tensor:
    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward")

    # keep numpy from elementwise-broadcasting over Tensor operands
    __array_ufunc__ = None

    def __init__(self, values, requires_grad=False, _parents=(), _backward=None):
        self.values = np.asarray(values, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.values.shape

    def item(self) -> float:
        return float(self.values)

    def zero_grad(self):
        self.grad = np.zeros_like(self.values)

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        self.grad += g

    def backward(self):
        if self.values.size != 1:
            raise ShapeError(f"backward root must be scalar, got shape {self.shape}")
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
        self._accum(np.ones_like(self.values))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _binary(a, b, fwd, da, db, name):
    a, b = as_tensor(a), as_tensor(b)
    try:
        values = fwd(a.values, b.values)
    except ValueError:
        raise ShapeError(f"{name}: incompatible shapes {a.shape} and {b.shape}") from None

    def backward(g):
        if a.requires_grad:
            a._accum(_unbroadcast(da(g, a.values, b.values), a.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(db(g, a.values, b.values), b.shape))

    return Tensor(values, _parents=(a, b), _backward=backward)


def add(a, b):
    return _binary(a, b, np.add, lambda g, x, y: g, lambda g, x, y: g, "add")


def sub(a, b):
    return _binary(a, b, np.subtract, lambda g, x, y: g, lambda g, x, y: -g, "sub")


def mul(a, b):
    return _binary(a, b, np.multiply, lambda g, x, y: g * y, lambda g, x, y: g * x, "mul")


def div(a, b):
    return _binary(
        a, b, np.divide,
        lambda g, x, y: g / y,
        lambda g, x, y: -g * x / (y * y),
        "div",
    )


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.values.ndim != 2 or b.values.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    values = a.values @ b.values

    def backward(g):
        if a.requires_grad:
            a._accum(g @ b.values.T)
        if b.requires_grad:
            b._accum(a.values.T @ g)

    return Tensor(values, _parents=(a, b), _backward=backward)


def _unary(a, fwd, dfn):
    a = as_tensor(a)
    values = fwd(a.values)

    def backward(g):
        if a.requires_grad:
            a._accum(dfn(g, a.values, values))

    return Tensor(values, _parents=(a,), _backward=backward)


def tanh(a):
    return _unary(a, np.tanh, lambda g, x, y: g * (1.0 - y * y))


def sigmoid(a):
    return _unary(
        a,
        lambda x: 1.0 / (1.0 + np.exp(-x)),
        lambda g, x, y: g * y * (1.0 - y),
    )


def relu(a):
    return _unary(a, lambda x: np.maximum(x, 0.0), lambda g, x, y: g * (x > 0))


def exp(a):
    return _unary(a, np.exp, lambda g, x, y: g * y)


def log(a):
    return _unary(a, np.log, lambda g, x, y: g / x)


def sqrt(a):
    return _unary(a, np.sqrt, lambda g, x, y: g / (2.0 * y))


def square(a):
    return _unary(a, np.square, lambda g, x, y: 2.0 * g * x)


def softmax(a, axis=-1):
    a = as_tensor(a)
    shifted = a.values - a.values.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    values = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if a.requires_grad:
            dot = (g * values).sum(axis=axis, keepdims=True)
            a._accum(values * (g - dot))

    return Tensor(values, _parents=(a,), _backward=backward)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    values = np.concatenate([t.values for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                t._accum(g[tuple(idx)])

    return Tensor(values, _parents=tuple(tensors), _backward=backward)


def take(a, key):
    """Basic slicing / integer indexing with scatter-add backward."""
    a = as_tensor(a)
    values = a.values[key]

    def backward(g):
        if a.requires_grad:
            out = np.zeros_like(a.values)
            np.add.at(out, key, g)
            a._accum(out)

    return Tensor(values, _parents=(a,), _backward=backward)


def reshape(a, shape):
    a = as_tensor(a)
    values = a.values.reshape(shape)

    def backward(g):
        if a.requires_grad:
            a._accum(g.reshape(a.shape))

    return Tensor(values, _parents=(a,), _backward=backward)


def sum_(a, axis=None):
    a = as_tensor(a)
    values = a.values.sum(axis=axis)

    def backward(g):
        if a.requires_grad:
            if axis is None:
                a._accum(np.broadcast_to(g, a.shape).copy())
            else:
                a._accum(np.broadcast_to(np.expand_dims(g, axis), a.shape).copy())

    return Tensor(values, _parents=(a,), _backward=backward)


def mean(a, axis=None):
    a = as_tensor(a)
    n = a.values.size if axis is None else a.shape[axis]
    return mul(sum_(a, axis=axis), 1.0 / n)


def gather_rows(table, indices):
    """Embedding lookup: rows of `table` at `indices` (1D), grads scatter-add."""
    table = as_tensor(table)
    indices = np.asarray(indices, dtype=np.int64)
    values = table.values[indices]

    def backward(g):
        if table.requires_grad:
            out = np.zeros_like(table.values)
            np.add.at(out, indices, g)
            table._accum(out)

    return Tensor(values, _parents=(table,), _backward=backward)


def pick(a, indices):
    """Per-row element selection: out[i] = a[i, indices[i]]."""
    a = as_tensor(a)
    indices = np.asarray(indices, dtype=np.int64)
    rows = np.arange(a.shape[0])
    values = a.values[rows, indices]

    def backward(g):
        if a.requires_grad:
            out = np.zeros_like(a.values)
            out[rows, indices] = g
            a._accum(out)

    return Tensor(values, _parents=(a,), _backward=backward)


def dropout(a, rate: float, rng: np.random.Generator | None = None, train: bool = True):
    """Inverted dropout; identity when rate == 0 or in eval mode."""
    a = as_tensor(a)
    if not train or rate == 0.0:
        return a
    if rng is None:
        raise ValueError("dropout in train mode requires an rng")
    keep = (rng.random(a.shape) >= rate) / (1.0 - rate)

    def backward(g):
        if a.requires_grad:
            a._accum(g * keep)

    return Tensor(a.values * keep, _parents=(a,), _backward=backward)


def cosine_similarity(a, b, eps: float = 1e-12):
    """Cosine of two 1-D vectors (norms clamped below by eps)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape or a.values.ndim != 1:
        raise ShapeError(f"cosine_similarity: need equal 1-D shapes, got {a.shape}, {b.shape}")
    na = sqrt(sum_(square(a)) + eps**2)
    nb = sqrt(sum_(square(b)) + eps**2)
    return div(sum_(mul(a, b)), mul(na, nb))


def cross_entropy_from_probs(probs, labels, weights=None):
    """Mean (or weighted sum / n) of -log p[i, labels[i]]."""
    picked = pick(probs, labels)
    nll = -log(picked)
    if weights is not None:
        nll = mul(nll, weights)
    return mean(nll)


class AdaGrad:
    """Per-coordinate accumulator optimizer with per-epoch lr decay.

    lr_epoch = lr0 * decay**epoch; p -= lr_epoch * g / (sqrt(acc) + eps).
    """

    def __init__(self, params: dict[str, Tensor], lr0: float = 0.5,
                 decay: float = 0.95, eps: float = 1e-8):
        self.params = params
        self.lr0 = lr0
        self.decay = decay
        self.eps = eps
        self.epoch = 0
        self.acc = {name: np.zeros_like(p.values) for name, p in params.items()}

    @property
    def lr(self) -> float:
        return self.lr0 * self.decay**self.epoch

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def step(self):
        lr = self.lr
        for name, p in self.params.items():
            if p.grad is None:
                continue
            acc = self.acc[name]
            acc += p.grad**2
            p.values -= lr * p.grad / (np.sqrt(acc) + self.eps)


def save_params(params: dict[str, Tensor], path) -> None:
    np.savez(path, **{name: p.values for name, p in params.items()})


def load_params(path) -> dict[str, Tensor]:
    with np.load(path) as data:
        return {name: Tensor(data[name], requires_grad=True) for name in data.files}
