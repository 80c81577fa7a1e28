"""Dense float64 tensors with reverse-mode differentiation.

Every op builds a node in an implicit computation graph; calling
``backward()`` on a scalar result walks the graph in reverse topological
order and accumulates gradients into ``.grad`` of every tensor created
with ``requires_grad=True``. Dropout masks are treated as constants.
"""

from __future__ import annotations

import contextlib

import numpy as np

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable graph construction inside the block (inference fast path)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _shape_error(op, a_shape, b_shape):
    return ValueError(f"{op}: incompatible shapes {a_shape} and {b_shape}")


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._backward = None
        self._parents = ()

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data.reshape(-1)[0])

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        """Run reverse-mode accumulation from this scalar."""
        if self.data.size != 1:
            raise ValueError(f"backward requires a scalar, got shape {self.shape}")
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            if node is not self and node._backward is not None:
                # interior nodes are not reused after backward; free memory
                node._backward = None
                node._parents = ()

    def __repr__(self):
        return f"Tensor(shape={self.shape}, grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __rsub__(self, other):
        return sub(other, self)

    def __rmul__(self, other):
        return mul(other, self)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


class Parameter(Tensor):
    """Named learnable tensor; uniqueness of names is enforced per model."""

    __slots__ = ("name",)

    def __init__(self, name, data):
        super().__init__(data, requires_grad=True)
        self.name = name

    def __repr__(self):
        return f"Parameter({self.name}, shape={self.shape})"


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _tracks(*tensors):
    return _GRAD_ENABLED and any(t.requires_grad for t in tensors)


def _make(data, parents, backward, track):
    out = Tensor(data, requires_grad=track)
    if track:
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(g, shape):
    """Reduce gradient ``g`` back to ``shape`` after numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data + b.data
    except ValueError:
        raise _shape_error("add", a.shape, b.shape) from None
    track = _tracks(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _make(data, (a, b), backward, track)


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data - b.data
    except ValueError:
        raise _shape_error("sub", a.shape, b.shape) from None
    track = _tracks(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g, b.shape))

    return _make(data, (a, b), backward, track)


def neg(a):
    a = _wrap(a)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(-g)

    return _make(-a.data, (a,), backward, track)


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data * b.data
    except ValueError:
        raise _shape_error("mul", a.shape, b.shape) from None
    track = _tracks(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _make(data, (a, b), backward, track)


def div(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data / b.data
    except ValueError:
        raise _shape_error("div", a.shape, b.shape) from None
    track = _tracks(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g / b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _make(data, (a, b), backward, track)


def matmul(a, b):
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise _shape_error("matmul", a.shape, b.shape)
    try:
        data = a.data @ b.data
    except ValueError:
        raise _shape_error("matmul", a.shape, b.shape) from None
    track = _tracks(a, b)

    def backward(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2)
            a._accumulate(_unbroadcast(ga, a.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            b._accumulate(_unbroadcast(gb, b.shape))

    return _make(data, (a, b), backward, track)


def tanh(a):
    a = _wrap(a)
    data = np.tanh(a.data)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (1.0 - data * data))

    return _make(data, (a,), backward, track)


def sigmoid(a):
    a = _wrap(a)
    x = a.data
    # split by sign to avoid exp overflow
    data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                    np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * data * (1.0 - data))

    return _make(data, (a,), backward, track)


def relu(a):
    a = _wrap(a)
    data = np.maximum(a.data, 0.0)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (a.data > 0))

    return _make(data, (a,), backward, track)


def leaky_relu(a, alpha=0.2):
    a = _wrap(a)
    data = np.where(a.data > 0, a.data, alpha * a.data)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * np.where(a.data > 0, 1.0, alpha))

    return _make(data, (a,), backward, track)


def elu(a, alpha=1.0):
    a = _wrap(a)
    expm = alpha * (np.exp(np.minimum(a.data, 0.0)) - 1.0)
    data = np.where(a.data > 0, a.data, expm)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * np.where(a.data > 0, 1.0, expm + alpha))

    return _make(data, (a,), backward, track)


def exp(a):
    a = _wrap(a)
    data = np.exp(a.data)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * data)

    return _make(data, (a,), backward, track)


def log(a, floor=None):
    """Natural log; with ``floor`` the input is clamped from below first
    (gradient is zero where the clamp is active)."""
    a = _wrap(a)
    x = np.maximum(a.data, floor) if floor is not None else a.data
    data = np.log(x)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            dg = g / x
            if floor is not None:
                dg = dg * (a.data >= floor)
            a._accumulate(dg)

    return _make(data, (a,), backward, track)


def sqrt(a):
    a = _wrap(a)
    data = np.sqrt(a.data)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * 0.5 / data)

    return _make(data, (a,), backward, track)


def softmax(a, axis=-1, mask=None):
    """Numerically stable softmax along ``axis``.

    ``mask`` is a constant ndarray; entries where it is falsy receive
    exactly zero probability (scores pushed to -inf before normalizing).
    """
    a = _wrap(a)
    x = a.data
    if mask is not None:
        x = np.where(mask, x, -np.inf)
    m = np.max(x, axis=axis, keepdims=True)
    # all-masked rows would give -inf max; keep them finite (callers avoid this)
    m = np.where(np.isfinite(m), m, 0.0)
    e = np.exp(x - m)
    data = e / np.sum(e, axis=axis, keepdims=True)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            inner = np.sum(g * data, axis=axis, keepdims=True)
            a._accumulate(data * (g - inner))

    return _make(data, (a,), backward, track)


def tsum(a, axis=None, keepdims=False):
    a = _wrap(a)
    data = np.sum(a.data, axis=axis, keepdims=keepdims)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            if axis is None:
                a._accumulate(np.broadcast_to(g, a.shape).copy())
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                a._accumulate(np.broadcast_to(gg, a.shape).copy())

    return _make(data, (a,), backward, track)


def tmean(a, axis=None, keepdims=False):
    a = _wrap(a)
    data = np.mean(a.data, axis=axis, keepdims=keepdims)
    n = a.data.size if axis is None else a.data.shape[axis]
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            if axis is None:
                a._accumulate(np.broadcast_to(g / n, a.shape).copy())
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                a._accumulate(np.broadcast_to(gg / n, a.shape).copy())

    return _make(data, (a,), backward, track)


def concat(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    track = _tracks(*tensors)
    offsets = np.cumsum([0] + [t.data.shape[axis] for t in tensors])

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                t._accumulate(g[tuple(idx)])

    return _make(data, tensors, backward, track)


def slice_axis(a, axis, start, stop):
    a = _wrap(a)
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, stop)
    idx = tuple(idx)
    data = a.data[idx]
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[idx] = g
            a._accumulate(full)

    return _make(data, (a,), backward, track)


def transpose(a, axes=None):
    a = _wrap(a)
    data = np.transpose(a.data, axes)
    track = _tracks(a)
    inv = None if axes is None else np.argsort(axes)

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.transpose(g, inv))

    return _make(data, (a,), backward, track)


def reshape(a, shape):
    a = _wrap(a)
    data = a.data.reshape(shape)
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.reshape(a.shape))

    return _make(data, (a,), backward, track)


def embedding(table, ids):
    """Row lookup: ``out[i] = table[ids[i]]``; gradient scatter-adds rows."""
    ids = np.asarray(ids, dtype=np.int64)
    data = table.data[ids]
    track = _tracks(table)

    def backward(g):
        if table.requires_grad:
            full = np.zeros_like(table.data)
            np.add.at(full, ids, g)
            table._accumulate(full)

    return _make(data, (table,), backward, track)


def pick(a, col_ids):
    """Per-row column pick on a 2-D tensor: ``out[i] = a[i, col_ids[i]]``."""
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ValueError(f"pick expects a 2-D tensor, got shape {a.shape}")
    col_ids = np.asarray(col_ids, dtype=np.int64)
    rows = np.arange(a.data.shape[0])
    data = a.data[rows, col_ids]
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            np.add.at(full, (rows, col_ids), g)
            a._accumulate(full)

    return _make(data, (a,), backward, track)


def scatter_sum(weights, ids, size):
    """Sum ``weights`` into ``size`` buckets along the last axis.

    weights: (..., N); ids: int array (N,); out: (..., size) where
    ``out[..., ids[i]] += weights[..., i]``.
    """
    weights = _wrap(weights)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1 or weights.data.shape[-1] != ids.shape[0]:
        raise _shape_error("scatter_sum", weights.shape, ids.shape)
    flat = weights.data.reshape(-1, ids.shape[0])
    out = np.zeros((flat.shape[0], size))
    np.add.at(out, (np.arange(flat.shape[0])[:, None], ids[None, :]), flat)
    data = out.reshape(weights.data.shape[:-1] + (size,))
    track = _tracks(weights)

    def backward(g):
        if weights.requires_grad:
            weights._accumulate(g[..., ids])

    return _make(data, (weights,), backward, track)


def dropout(a, p, rng, training):
    """Inverted dropout; the mask is a constant wrt differentiation."""
    a = _wrap(a)
    if not training or p <= 0.0:
        return a
    mask = (rng.random(a.shape) >= p) / (1.0 - p)
    data = a.data * mask
    track = _tracks(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * mask)

    return _make(data, (a,), backward, track)


# fluent method aliases (first positional argument is the tensor itself)
Tensor.tanh = tanh
Tensor.sigmoid = sigmoid
Tensor.relu = relu
Tensor.exp = exp
Tensor.log = log
Tensor.sqrt = sqrt
Tensor.softmax = softmax
Tensor.reshape = reshape
Tensor.transpose = transpose
Tensor.slice_axis = slice_axis
