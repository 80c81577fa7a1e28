"""Decoder-side building blocks: graph guidance, gated state update, the
vocabulary head, and the copy mixture.

The guided step reads the graph twice. A static background vector is
concatenated to every decoder input. A per-step guidance vector is attended
from the graph with the current decoder state and folded in through a
sigmoid gate:

    s_t = s'_t + sigmoid(f_g(h)) * tanh(f_u(h))

where h is the per-step guidance readout (or, optionally, the mean graph
node vector). The recurrent variant scores guidance additively; the
transformer variant uses an unscaled dot product against the node vectors
(a 1/sqrt(d) factor is available behind a switch).
"""

from __future__ import annotations

import numpy as np

from .layers import Linear
from .numerics import Tensor, concat, matmul, scatter_sum, sigmoid, softmax, tanh


class GatedStateUpdate:
    def __init__(self, reg, name, guide_dim, state_dim):
        self.gate = Linear(reg, f"{name}.gate", guide_dim, state_dim)
        self.value = Linear(reg, f"{name}.value", guide_dim, state_dim)

    def __call__(self, s_prime, guidance):
        return s_prime + sigmoid(self.gate(guidance)) * tanh(self.value(guidance))


def dot_product_guidance(queries, node_vectors, scaled=False):
    """queries (T, d) against node_vectors (V, d) -> (guided (T, d), weights (T, V))."""
    scores = matmul(queries, node_vectors.T)
    if scaled:
        scores = scores * (1.0 / np.sqrt(node_vectors.shape[1]))
    weights = softmax(scores, axis=-1)
    return matmul(weights, node_vectors), weights


class VocabHead:
    """Two stacked projections with no biases:
    P = softmax(tanh([state; context] @ Q) @ Q')."""

    def __init__(self, reg, name, state_dim, context_dim, vocab_size):
        self.inner = Linear(reg, f"{name}.Q", state_dim + context_dim, state_dim, bias=False)
        self.outer = Linear(reg, f"{name}.Qp", state_dim, vocab_size, bias=False)

    def __call__(self, states, contexts):
        hidden = tanh(self.inner(concat([states, contexts], axis=1)))
        return softmax(self.outer(hidden), axis=-1)


class GenProbHead:
    """p_gen = sigmoid(w . [context; state; expanded input] + b)."""

    def __init__(self, reg, name, context_dim, state_dim, input_dim):
        self.lin = Linear(reg, f"{name}", context_dim + state_dim + input_dim, 1)

    def __call__(self, contexts, states, inputs):
        return sigmoid(self.lin(concat([contexts, states, inputs], axis=1)))


def pointer_mixture(p_vocab, source_attention, p_gen, source_ext_ids, extended_size):
    """Mix generation and copy distributions over the extended vocabulary.

    p_vocab: (T, base); source_attention: (T, N); p_gen: (T, 1);
    source_ext_ids: (N,) extended ids of the source tokens. Attention mass
    on repeated source tokens accumulates onto the shared id.
    """
    base = p_vocab.shape[1]
    gen = p_vocab * p_gen
    if extended_size > base:
        pad = Tensor(np.zeros((p_vocab.shape[0], extended_size - base)))
        gen = concat([gen, pad], axis=1)
    elif extended_size < base:
        raise ValueError("extended vocabulary cannot be smaller than the base one")
    copy = scatter_sum(source_attention, source_ext_ids, extended_size) * (1.0 - p_gen)
    return gen + copy
