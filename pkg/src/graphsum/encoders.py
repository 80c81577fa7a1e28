"""Findings-sequence encoders and word-graph encoders.

Both sequence encoders expose the same contract: given embedded tokens they
return per-token states plus a single findings summary vector. The
bidirectional LSTM summarizes with its final hidden state; the transformer
stack averages its output states. Graph encoders turn node features plus the
adjacency into per-node representations; two independent stacks produce the
background and the guidance encodings.
"""

from __future__ import annotations

import numpy as np

from .layers import (
    FeedForward,
    LayerNorm,
    Linear,
    LstmCell,
    MultiHeadAttention,
    sinusoidal_positions,
)
from .numerics import Tensor, concat, elu, leaky_relu, matmul, relu, softmax


class EncoderOutput:
    """states: (N, d) per-token vectors; summary: (1, d) findings vector;
    cell: (1, d) final LSTM cell state or None for the transformer."""

    __slots__ = ("states", "summary", "cell")

    def __init__(self, states, summary, cell=None):
        self.states = states
        self.summary = summary
        self.cell = cell


class BiLstmEncoder:
    def __init__(self, reg, config):
        in_dim = config.emb_dim
        self.layers = []
        for i in range(config.enc_layers):
            fwd = LstmCell(reg, f"enc.l{i}.fwd", in_dim, config.enc_hidden)
            bwd = LstmCell(reg, f"enc.l{i}.bwd", in_dim, config.enc_hidden)
            self.layers.append((fwd, bwd))
            in_dim = 2 * config.enc_hidden
        self.out_dim = in_dim

    def __call__(self, embedded):
        n = embedded.shape[0]
        if n == 0:
            raise ValueError("cannot encode an empty findings sequence")
        x = embedded
        h_last = c_last = None
        for fwd, bwd in self.layers:
            zeros = Tensor(np.zeros((1, fwd.hidden_dim)))
            fproj = fwd.project_inputs(x)
            h, c = zeros, zeros
            fwd_rows = []
            for t in range(n):
                h, c = fwd.step_projected(fproj.slice_axis(0, t, t + 1), h, c)
                fwd_rows.append(h)
            fwd_final_h, fwd_final_c = h, c

            bproj = bwd.project_inputs(x)
            h, c = zeros, zeros
            bwd_rows = []
            for t in range(n - 1, -1, -1):
                h, c = bwd.step_projected(bproj.slice_axis(0, t, t + 1), h, c)
                bwd_rows.append(h)
            bwd_rows.reverse()
            bwd_final_h, bwd_final_c = h, c

            fwd_states = fwd_rows[0] if n == 1 else concat(fwd_rows, axis=0)
            bwd_states = bwd_rows[0] if n == 1 else concat(bwd_rows, axis=0)
            x = concat([fwd_states, bwd_states], axis=1)
            h_last = concat([fwd_final_h, bwd_final_h], axis=1)
            c_last = concat([fwd_final_c, bwd_final_c], axis=1)
        return EncoderOutput(x, h_last, c_last)


class TransformerEncoder:
    def __init__(self, reg, config):
        d = config.d_model
        self.d_model = d
        self.blocks = []
        for i in range(config.num_layers):
            self.blocks.append({
                "ln1": LayerNorm(reg, f"enc.l{i}.ln1", d),
                "attn": MultiHeadAttention(reg, f"enc.l{i}.attn", d, config.num_heads),
                "ln2": LayerNorm(reg, f"enc.l{i}.ln2", d),
                "ffn": FeedForward(reg, f"enc.l{i}.ffn", d, config.ff_dim),
            })
        self.final_ln = LayerNorm(reg, "enc.final_ln", d)
        self.out_dim = d

    def __call__(self, embedded):
        n = embedded.shape[0]
        if n == 0:
            raise ValueError("cannot encode an empty findings sequence")
        x = embedded * np.sqrt(self.d_model) + Tensor(sinusoidal_positions(n, self.d_model))
        for blk in self.blocks:
            normed = blk["ln1"](x)
            x = x + blk["attn"](normed, normed)
            x = x + blk["ffn"](blk["ln2"](x))
        states = self.final_ln(x)
        summary = states.mean(axis=0, keepdims=True)
        return EncoderOutput(states, summary, None)


class GcnStack:
    """Graph convolution layers over the normalized adjacency."""

    def __init__(self, reg, name, in_dim, hidden, num_layers):
        self.linears = []
        d = in_dim
        for i in range(num_layers):
            self.linears.append(Linear(reg, f"{name}.l{i}", d, hidden))
            d = hidden
        self.out_dim = hidden

    def __call__(self, feats, graph):
        from .wordgraph import normalized_adjacency
        a_hat = Tensor(normalized_adjacency(graph.adjacency))
        h = feats
        for lin in self.linears:
            h = relu(matmul(a_hat, lin(h)))
        return h


class GatStack:
    """Single-head graph attention layers masked to graph neighborhoods."""

    def __init__(self, reg, name, in_dim, hidden, num_layers):
        self.layers = []
        d = in_dim
        for i in range(num_layers):
            self.layers.append({
                "W": reg.matrix(f"{name}.l{i}.W", d, hidden),
                "a_src": reg.matrix(f"{name}.l{i}.a_src", hidden, 1),
                "a_dst": reg.matrix(f"{name}.l{i}.a_dst", hidden, 1),
            })
            d = hidden
        self.out_dim = hidden

    def __call__(self, feats, graph):
        mask = graph.adjacency > 0
        h = feats
        for layer in self.layers:
            hw = matmul(h, layer["W"])
            s_src = matmul(hw, layer["a_src"])           # (V, 1)
            s_dst = matmul(hw, layer["a_dst"])           # (V, 1)
            scores = leaky_relu(s_src + s_dst.T, alpha=0.2)
            attn = softmax(scores, axis=-1, mask=mask)
            h = elu(matmul(attn, hw))
        return h


def make_graph_stack(reg, name, kind, in_dim, hidden, num_layers):
    if kind == "gcn":
        return GcnStack(reg, name, in_dim, hidden, num_layers)
    if kind == "gat":
        return GatStack(reg, name, in_dim, hidden, num_layers)
    raise ValueError(f"unknown graph encoder kind {kind!r}")


class GraphEncoding:
    """background / guidance: (V, d) node vectors or None when the graph is
    empty; the flag lets the decoder fall back to sequence-only behavior."""

    __slots__ = ("background", "guidance", "empty")

    def __init__(self, background, guidance, empty):
        self.background = background
        self.guidance = guidance
        self.empty = empty
