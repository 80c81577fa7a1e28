"""Reusable neural blocks: linear maps, LSTM cell, attention, layer norm.

Every block draws its parameters from a shared registry owned by the model,
so checkpointing and gradient clipping see one flat list. Initialization is
deterministic given the registry's RNG: embeddings uniform in [-0.1, 0.1],
weight matrices Xavier-uniform, biases zero.
"""

from __future__ import annotations

import numpy as np

from .numerics import Parameter, Tensor, concat, matmul, relu, softmax, tanh, tsum


class ParamRegistry:
    """Flat name -> Parameter store; names must be unique."""

    def __init__(self, rng):
        self.rng = rng
        self._params = {}

    def embedding(self, name, rows, cols):
        data = self.rng.uniform(-0.1, 0.1, size=(rows, cols))
        return self._add(name, data)

    def matrix(self, name, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        data = self.rng.uniform(-limit, limit, size=(fan_in, fan_out))
        return self._add(name, data)

    def zeros(self, name, *shape):
        return self._add(name, np.zeros(shape))

    def ones(self, name, *shape):
        return self._add(name, np.ones(shape))

    def _add(self, name, data):
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        p = Parameter(name, data)
        self._params[name] = p
        return p

    def parameters(self):
        return list(self._params.values())

    def named(self):
        return dict(self._params)

    def __getitem__(self, name):
        return self._params[name]


class Linear:
    """y = x @ W (+ b). W is stored (fan_in, fan_out)."""

    def __init__(self, reg, name, fan_in, fan_out, bias=True):
        self.W = reg.matrix(f"{name}.W", fan_in, fan_out)
        self.b = reg.zeros(f"{name}.b", fan_out) if bias else None

    def __call__(self, x):
        y = matmul(x, self.W)
        if self.b is not None:
            y = y + self.b
        return y


class LstmCell:
    """Single LSTM cell with fused gate projection (i, f, g, o order)."""

    def __init__(self, reg, name, input_dim, hidden_dim):
        self.hidden_dim = hidden_dim
        self.Wx = reg.matrix(f"{name}.Wx", input_dim, 4 * hidden_dim)
        self.Uh = reg.matrix(f"{name}.Uh", hidden_dim, 4 * hidden_dim)
        self.b = reg.zeros(f"{name}.b", 4 * hidden_dim)

    def project_inputs(self, xs):
        """Precompute x @ Wx for a whole (T, input_dim) sequence."""
        return matmul(xs, self.Wx)

    def step_projected(self, xproj_row, h_prev, c_prev):
        gates = xproj_row + matmul(h_prev, self.Uh) + self.b
        H = self.hidden_dim
        i = gates.slice_axis(1, 0, H).sigmoid()
        f = gates.slice_axis(1, H, 2 * H).sigmoid()
        g = gates.slice_axis(1, 2 * H, 3 * H).tanh()
        o = gates.slice_axis(1, 3 * H, 4 * H).sigmoid()
        c = f * c_prev + i * g
        h = o * tanh(c)
        return h, c

    def step(self, x_row, h_prev, c_prev):
        return self.step_projected(self.project_inputs(x_row), h_prev, c_prev)


class AttCon:
    """Additive attention producing a weighted combination of states.

    scores_i = p . tanh(W1 @ state_i + W2 @ query); weights = softmax(scores);
    context = sum_i weights_i * state_i. Supports a batch of queries at once.
    """

    def __init__(self, reg, name, state_dim, query_dim, attn_dim):
        self.W1 = reg.matrix(f"{name}.W1", state_dim, attn_dim)
        self.W2 = reg.matrix(f"{name}.W2", query_dim, attn_dim)
        self.p = reg.matrix(f"{name}.p", attn_dim, 1)

    def __call__(self, queries, states):
        """queries (T, dq), states (M, ds) -> context (T, ds), weights (T, M)."""
        u = matmul(states, self.W1)              # (M, da)
        v = matmul(queries, self.W2)             # (T, da)
        t_dim = v.shape[0]
        m_dim = u.shape[0]
        scores = tanh(u.reshape((1, m_dim, -1)) + v.reshape((t_dim, 1, -1)))
        scores = matmul(scores, self.p).reshape((t_dim, m_dim))
        weights = softmax(scores, axis=-1)
        context = matmul(weights, states)
        return context, weights


class LayerNorm:
    def __init__(self, reg, name, dim, eps=1e-6):
        self.gamma = reg.ones(f"{name}.g", dim)
        self.beta = reg.zeros(f"{name}.b", dim)
        self.eps = eps

    def __call__(self, x):
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        normed = centered / (var + self.eps).sqrt()
        return normed * self.gamma + self.beta


class MultiHeadAttention:
    def __init__(self, reg, name, dim, num_heads):
        if dim % num_heads != 0:
            raise ValueError("dim must be a multiple of num_heads")
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.Wq = reg.matrix(f"{name}.Wq", dim, dim)
        self.Wk = reg.matrix(f"{name}.Wk", dim, dim)
        self.Wv = reg.matrix(f"{name}.Wv", dim, dim)
        self.Wo = reg.matrix(f"{name}.Wo", dim, dim)

    def __call__(self, queries, keys_values, mask=None):
        """queries (T, d), keys_values (S, d), mask (T, S) of {0,1} or None."""
        q = matmul(queries, self.Wq)
        k = matmul(keys_values, self.Wk)
        v = matmul(keys_values, self.Wv)
        heads = []
        scale = 1.0 / np.sqrt(self.head_dim)
        for h in range(self.num_heads):
            lo, hi = h * self.head_dim, (h + 1) * self.head_dim
            qh = q.slice_axis(1, lo, hi)
            kh = k.slice_axis(1, lo, hi)
            vh = v.slice_axis(1, lo, hi)
            scores = matmul(qh, kh.T) * scale
            attn = softmax(scores, axis=-1, mask=mask)
            heads.append(matmul(attn, vh))
        merged = concat(heads, axis=1)
        return matmul(merged, self.Wo)


class FeedForward:
    def __init__(self, reg, name, dim, hidden):
        self.inner = Linear(reg, f"{name}.in", dim, hidden)
        self.outer = Linear(reg, f"{name}.out", hidden, dim)

    def __call__(self, x):
        return self.outer(relu(self.inner(x)))


def sinusoidal_positions(length, dim):
    """Fixed position encodings: sin on even columns, cos on odd."""
    pos = np.arange(length)[:, None].astype(float)
    idx = np.arange(dim)[None, :].astype(float)
    angles = pos / np.power(10000.0, 2.0 * np.floor(idx / 2.0) / dim)
    enc = np.where(idx % 2 == 0, np.sin(angles), np.cos(angles))
    return enc


def causal_mask(length):
    """Lower-triangular {0,1} mask: position t attends to <= t."""
    return np.tril(np.ones((length, length)))
