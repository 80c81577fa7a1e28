"""End-to-end summarizer: embedding table, findings encoder, twin graph
encoders, and the guided pointer decoder.

One model object owns a flat parameter registry, so the optimizer, gradient
clipping, and checkpoints all see the same ordered list. Per-example work is
split into ``prepare_example`` (pure data: ids, graph, copy encoding),
``encode`` (everything fixed for the whole decode), and either
``forward_sequence`` (teacher-forced distributions for all positions) or
``step`` (one token at a time, used by search).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import config_hash
from .corpus import BOS, EOS, UNK, encode_with_copy
from .decoder import (
    GatedStateUpdate,
    GenProbHead,
    VocabHead,
    dot_product_guidance,
    pointer_mixture,
)
from .encoders import BiLstmEncoder, TransformerEncoder, make_graph_stack
from .layers import (
    AttCon,
    FeedForward,
    LayerNorm,
    Linear,
    LstmCell,
    MultiHeadAttention,
    ParamRegistry,
    causal_mask,
    sinusoidal_positions,
)
from .numerics import Tensor, concat, dropout, embedding, matmul, tanh
from .wordgraph import build_graph


@dataclass(frozen=True)
class Prepared:
    """Everything derived from one report that the model consumes."""

    report_id: str
    src_input_ids: np.ndarray   # (N,) base-vocabulary encoder inputs
    src_ext_ids: np.ndarray     # (N,) extended ids for the copy mixture
    node_ids: np.ndarray        # (V,) base-vocabulary ids of graph nodes
    graph: object
    dec_input_ids: np.ndarray   # (T,) BOS followed by the impression
    gold_ids: np.ndarray        # (T,) impression followed by EOS
    extended_size: int
    oov_tokens: tuple
    reference_tokens: tuple


def prepare_example(report, vocab, config):
    enc = encode_with_copy(report, vocab)
    graph = build_graph(report, config.edge_types)
    node_ids = np.array([vocab.id_of(w) for w in graph.nodes], dtype=np.int64)
    dec_input = np.array([BOS] + list(enc.target_input_ids), dtype=np.int64)
    if config.copy:
        gold = np.array(list(enc.target_ids) + [EOS], dtype=np.int64)
        ext_size = enc.extended_size
    else:
        gold = np.array(list(enc.target_input_ids) + [EOS], dtype=np.int64)
        ext_size = len(vocab)
    return Prepared(
        report_id=report.id,
        src_input_ids=np.array(enc.source_input_ids, dtype=np.int64),
        src_ext_ids=np.array(enc.source_ids, dtype=np.int64),
        node_ids=node_ids,
        graph=graph,
        dec_input_ids=dec_input,
        gold_ids=gold,
        extended_size=ext_size,
        oov_tokens=enc.oov_tokens,
        reference_tokens=tuple(report.impression_tokens),
    )


class EncodeCache:
    """Per-example quantities that stay fixed across decoder steps."""

    __slots__ = ("prep", "states", "summary", "cell", "guidance_nodes",
                 "background", "background_attention", "has_graph")

    def __init__(self, prep, states, summary, cell, guidance_nodes,
                 background, background_attention, has_graph):
        self.prep = prep
        self.states = states
        self.summary = summary
        self.cell = cell
        self.guidance_nodes = guidance_nodes
        self.background = background
        self.background_attention = background_attention
        self.has_graph = has_graph


class LstmDecoderState:
    __slots__ = ("s", "c")

    def __init__(self, s, c):
        self.s = s
        self.c = c


class PrefixDecoderState:
    __slots__ = ("prefix",)

    def __init__(self, prefix=()):
        self.prefix = tuple(prefix)


class StepTrace:
    """Attention diagnostics for one forward pass (row-per-position)."""

    __slots__ = ("source_attention", "guidance_attention", "p_gen")

    def __init__(self, source_attention, guidance_attention, p_gen):
        self.source_attention = source_attention
        self.guidance_attention = guidance_attention
        self.p_gen = p_gen


class Summarizer:
    def __init__(self, config, vocab_size, rng=None):
        config.validate()
        self.config = config
        self.vocab_size = vocab_size
        if rng is None:
            rng = np.random.default_rng(config.seed)
        reg = ParamRegistry(rng)
        self.reg = reg
        c = config
        self.graph_on = c.gnn != "off"
        self.emb_dim = c.emb_dim if c.variant == "lstm" else c.d_model
        self.emb_table = reg.embedding("emb.table", vocab_size, self.emb_dim)

        if c.variant == "lstm":
            self.encoder = BiLstmEncoder(reg, c)
        else:
            self.encoder = TransformerEncoder(reg, c)
        enc_dim = self.encoder.out_dim
        self.enc_dim = enc_dim

        if self.graph_on:
            self.graph_bg = make_graph_stack(
                reg, "graph.bg", c.gnn, self.emb_dim, c.graph_hidden, c.graph_layers)
            self.graph_gd = make_graph_stack(
                reg, "graph.gd", c.gnn, self.emb_dim, c.graph_hidden, c.graph_layers)
            self.att_bg = AttCon(reg, "att.bg", c.graph_hidden, enc_dim, c.attn_dim)

        self.input_dim = self.emb_dim + (c.graph_hidden if self.graph_on else 0)
        if c.variant == "lstm":
            self.state_dim = c.dec_hidden
            self.dec_cell = LstmCell(reg, "dec.cell", self.input_dim, c.dec_hidden)
            self.init_s = Linear(reg, "dec.init_s", enc_dim, c.dec_hidden)
            self.init_c = Linear(reg, "dec.init_c", enc_dim, c.dec_hidden)
            if self.graph_on:
                self.att_gd = AttCon(reg, "att.gd", c.graph_hidden, c.dec_hidden, c.attn_dim)
        else:
            d = c.d_model
            self.state_dim = d
            if self.graph_on:
                self.in_proj = Linear(reg, "dec.in_proj", self.input_dim, d)
            self.dec_blocks = []
            for i in range(c.num_layers):
                self.dec_blocks.append({
                    "ln1": LayerNorm(reg, f"dec.l{i}.ln1", d),
                    "self": MultiHeadAttention(reg, f"dec.l{i}.self", d, c.num_heads),
                    "ln2": LayerNorm(reg, f"dec.l{i}.ln2", d),
                    "cross": MultiHeadAttention(reg, f"dec.l{i}.cross", d, c.num_heads),
                    "ln3": LayerNorm(reg, f"dec.l{i}.ln3", d),
                    "ffn": FeedForward(reg, f"dec.l{i}.ffn", d, c.ff_dim),
                })
            self.dec_final_ln = LayerNorm(reg, "dec.final_ln", d)

        if self.graph_on:
            self.update = GatedStateUpdate(reg, "dec.update", c.graph_hidden, self.state_dim)
        self.att_src = AttCon(reg, "att.src", enc_dim, self.state_dim, c.attn_dim)
        self.vocab_head = VocabHead(reg, "out.vocab", self.state_dim, enc_dim, vocab_size)
        if c.copy:
            self.pgen_head = GenProbHead(reg, "out.pgen", enc_dim, self.state_dim,
                                         self.input_dim)

    # -- parameter access -------------------------------------------------

    def parameters(self):
        return self.reg.parameters()

    def named_parameters(self):
        return self.reg.named()

    def config_hash(self):
        return config_hash(self.config)

    # -- encoding ----------------------------------------------------------

    def _embed(self, ids, training, rng):
        rows = embedding(self.emb_table, ids)
        return dropout(rows, self.config.dropout, rng, training)

    def encode(self, prep, training=False, rng=None):
        embedded = self._embed(prep.src_input_ids, training, rng)
        enc_out = self.encoder(embedded)

        guidance_nodes = None
        background = None
        background_attention = None
        has_graph = self.graph_on and not prep.graph.is_empty
        if self.graph_on:
            if has_graph:
                feats = self._embed(prep.node_ids, training, rng)
                z_bg = self.graph_bg(feats, prep.graph)
                guidance_nodes = self.graph_gd(feats, prep.graph)
                background, background_attention = self.att_bg(enc_out.summary, z_bg)
            else:
                # keep decoder input width stable for annotation-free reports
                background = Tensor(np.zeros((1, self.config.graph_hidden)))
        return EncodeCache(prep, enc_out.states, enc_out.summary, enc_out.cell,
                           guidance_nodes, background, background_attention, has_graph)

    # -- decoder input assembly ---------------------------------------------

    def _expand_inputs(self, token_ids, cache, training, rng):
        """Embed decoder-side tokens and append the background vector."""
        rows = self._embed(token_ids, training, rng)
        if not self.graph_on:
            return rows
        t = len(token_ids)
        ones = Tensor(np.ones((t, 1)))
        return concat([rows, matmul(ones, cache.background)], axis=1)

    def _guidance_input(self, readout, cache, t):
        if self.config.update_input == "graph_mean":
            mean = cache.guidance_nodes.mean(axis=0, keepdims=True)
            if t == 1:
                return mean
            return matmul(Tensor(np.ones((t, 1))), mean)
        return readout

    # -- recurrent path ------------------------------------------------------

    def start_state(self, cache):
        if self.config.variant == "lstm":
            init_from_h = tanh(self.init_s(cache.summary))
            init_from_c = tanh(self.init_c(cache.cell))
            return LstmDecoderState(init_from_h, init_from_c)
        return PrefixDecoderState()

    def _lstm_step(self, cache, state, expanded_row, training, rng):
        s_prime, c_new = self.dec_cell.step(expanded_row, state.s, state.c)
        guidance_attention = None
        if cache.has_graph:
            query = c_new if self.config.guidance_query == "cell" else s_prime
            readout, guidance_attention = self.att_gd(query, cache.guidance_nodes)
            s_new = self.update(s_prime, self._guidance_input(readout, cache, 1))
        else:
            s_new = s_prime
        context, source_attention = self.att_src(s_new, cache.states)
        probs, p_gen = self._output_distribution(
            s_new, context, source_attention, expanded_row, cache)
        trace = StepTrace(source_attention, guidance_attention, p_gen)
        return probs, LstmDecoderState(s_new, c_new), trace

    # -- transformer path ----------------------------------------------------

    def _transformer_states(self, expanded, cache, training, rng):
        """Run the causal stack; returns (penultimate, final) streams."""
        d = self.config.d_model
        x = self.in_proj(expanded) if self.graph_on else expanded
        t = x.shape[0]
        x = x * np.sqrt(d) + Tensor(sinusoidal_positions(t, d))
        mask = causal_mask(t)
        penultimate = None
        for i, blk in enumerate(self.dec_blocks):
            normed = blk["ln1"](x)
            x = x + blk["self"](normed, normed, mask=mask)
            x = x + blk["cross"](blk["ln2"](x), cache.states)
            x = x + blk["ffn"](blk["ln3"](x))
            if i == len(self.dec_blocks) - 2:
                penultimate = x
        return penultimate, self.dec_final_ln(x)

    def _transformer_forward(self, token_ids, cache, training, rng):
        expanded = self._expand_inputs(token_ids, cache, training, rng)
        penultimate, s_prime = self._transformer_states(expanded, cache, training, rng)
        guidance_attention = None
        if cache.has_graph:
            readout, guidance_attention = dot_product_guidance(
                penultimate, cache.guidance_nodes, scaled=self.config.scaled_guidance)
            states = self.update(
                s_prime, self._guidance_input(readout, cache, s_prime.shape[0]))
        else:
            states = s_prime
        contexts, source_attention = self.att_src(states, cache.states)
        probs, p_gen = self._output_distribution(
            states, contexts, source_attention, expanded, cache)
        return probs, StepTrace(source_attention, guidance_attention, p_gen)

    # -- shared output head ----------------------------------------------------

    def _output_distribution(self, states, contexts, source_attention,
                             expanded_inputs, cache):
        """Distribution over the extended vocabulary plus p_gen (None if
        copying is off)."""
        p_vocab = self.vocab_head(states, contexts)
        if not self.config.copy:
            return p_vocab, None
        p_gen = self.pgen_head(contexts, states, expanded_inputs)
        probs = pointer_mixture(p_vocab, source_attention, p_gen,
                                cache.prep.src_ext_ids, cache.prep.extended_size)
        return probs, p_gen

    # -- public forward passes ---------------------------------------------

    def forward_sequence(self, cache, token_ids, training=False, rng=None):
        """Teacher-forced distributions for every position.

        token_ids: decoder inputs (T,). Returns (probs (T, extended), trace).
        """
        if self.config.variant == "transformer":
            return self._transformer_forward(token_ids, cache, training, rng)
        state = self.start_state(cache)
        expanded = self._expand_inputs(token_ids, cache, training, rng)
        rows = []
        src_att_rows = []
        guide_att_rows = []
        pgen_rows = []
        for t in range(len(token_ids)):
            row = expanded.slice_axis(0, t, t + 1)
            probs, state, trace = self._lstm_step(cache, state, row, training, rng)
            rows.append(probs)
            src_att_rows.append(trace.source_attention)
            if trace.guidance_attention is not None:
                guide_att_rows.append(trace.guidance_attention)
            if trace.p_gen is not None:
                pgen_rows.append(trace.p_gen)
        probs = rows[0] if len(rows) == 1 else concat(rows, axis=0)
        trace = StepTrace(
            concat(src_att_rows, axis=0) if len(src_att_rows) > 1 else src_att_rows[0],
            concat(guide_att_rows, axis=0) if len(guide_att_rows) > 1 else
            (guide_att_rows[0] if guide_att_rows else None),
            concat(pgen_rows, axis=0) if len(pgen_rows) > 1 else
            (pgen_rows[0] if pgen_rows else None),
        )
        return probs, trace

    def step(self, cache, state, prev_token_id, training=False, rng=None):
        """Advance one position; returns (probs row (1, extended), state, trace)."""
        if self.config.variant == "lstm":
            expanded = self._expand_inputs(np.array([prev_token_id]), cache,
                                           training, rng)
            return self._lstm_step(cache, state, expanded, training, rng)
        prefix = state.prefix + (prev_token_id,)
        probs, trace = self._transformer_forward(
            np.array(prefix, dtype=np.int64), cache, training, rng)
        t = len(prefix)
        last = probs.slice_axis(0, t - 1, t)
        return last, PrefixDecoderState(prefix), trace
