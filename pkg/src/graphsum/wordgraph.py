"""Typed word graphs over entity words of one findings section.

Nodes are distinct surface forms covered by entity spans (repeats merge
into a single node). Three edge types connect them:

  I   adjacent tokens inside the same entity
  II  words of a modifier entity to words of the entity it modifies
  III words linked by a dependency arc whose both endpoints are entity words

Edges are undirected; the adjacency matrix is symmetric with a unit
diagonal. Edge type labels are kept only so ablations can filter them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusError, count_sentences

EDGE_TYPES = ("I", "II", "III")

# modifier category -> category of the entity it modifies
MODIFIER_BASE = {
    "anatomy_modifier": "anatomy",
    "observation_modifier": "observation",
    "uncertainty": "observation",
}


@dataclass(frozen=True)
class WordGraph:
    nodes: tuple                  # distinct surface forms, first-seen order
    node_occurrences: dict        # node -> tuple of covered token positions
    typed_edges: frozenset        # (u, v, type) with u before v in node order
    adjacency: np.ndarray         # |V| x |V| binary, symmetric, unit diagonal

    @property
    def is_empty(self):
        return len(self.nodes) == 0

    def node_index(self, word):
        return self.nodes.index(word)


def collect_nodes(findings_tokens, entity_spans):
    """One node per distinct covered surface form, plus its occurrences."""
    nodes = []
    occurrences = {}
    for span in sorted(entity_spans, key=lambda s: (s.start, s.end)):
        for pos in range(span.start, span.end):
            word = findings_tokens[pos]
            if word not in occurrences:
                nodes.append(word)
                occurrences[word] = []
            if pos not in occurrences[word]:
                occurrences[word].append(pos)
    return tuple(nodes), {w: tuple(sorted(ps)) for w, ps in occurrences.items()}


def type1_edges(findings_tokens, entity_spans):
    """Edges between token-adjacent words inside one entity span."""
    edges = set()
    for span in entity_spans:
        for pos in range(span.start, span.end - 1):
            u, v = findings_tokens[pos], findings_tokens[pos + 1]
            if u != v:
                edges.add(frozenset((u, v)))
    return edges


def _span_distance(a, b):
    """Token gap between two spans (0 when they touch or overlap)."""
    if a.start < b.end and b.start < a.end:
        return 0
    if a.end <= b.start:
        return b.start - a.end + 1
    return a.start - b.end + 1


def resolve_modifier_target(spans, idx):
    """Entity index modified by ``spans[idx]``, or None.

    An annotated ``target`` wins when its category matches the modifier's
    base category; otherwise the nearest base-category entity is used, with
    ties broken leftward.
    """
    mod = spans[idx]
    base = MODIFIER_BASE.get(mod.category)
    if base is None:
        return None
    if mod.target is not None and 0 <= mod.target < len(spans) \
            and spans[mod.target].category == base:
        return mod.target
    best = None
    best_key = None
    for j, cand in enumerate(spans):
        if j == idx or cand.category != base:
            continue
        key = (_span_distance(mod, cand), cand.start)
        if best_key is None or key < best_key:
            best, best_key = j, key
    return best


def type2_edges(findings_tokens, entity_spans):
    """All word pairs between a modifier entity and the entity it modifies."""
    edges = set()
    for i in range(len(entity_spans)):
        j = resolve_modifier_target(entity_spans, i)
        if j is None:
            continue
        mod, tgt = entity_spans[i], entity_spans[j]
        for p in range(mod.start, mod.end):
            for q in range(tgt.start, tgt.end):
                u, v = findings_tokens[p], findings_tokens[q]
                if u != v:
                    edges.add(frozenset((u, v)))
    return edges


def type3_edges(findings_tokens, dependency_arcs, node_occurrences):
    """Edges from dependency arcs whose both endpoints are entity words."""
    covered = {pos for positions in node_occurrences.values()
               for pos in positions}
    edges = set()
    for arc in dependency_arcs:
        if arc.head < 0:
            continue
        if arc.head in covered and arc.dep in covered:
            u, v = findings_tokens[arc.head], findings_tokens[arc.dep]
            if u != v:
                edges.add(frozenset((u, v)))
    return edges


def build_graph(report, edge_types=EDGE_TYPES):
    """Word graph of one report restricted to the enabled edge types."""
    enabled = tuple(edge_types)
    for et in enabled:
        if et not in EDGE_TYPES:
            raise ValueError(f"unknown edge type {et!r}")
    nodes, occurrences = collect_nodes(report.findings_tokens,
                                       report.entity_spans)
    order = {w: i for i, w in enumerate(nodes)}
    typed = set()
    per_type = {
        "I": lambda: type1_edges(report.findings_tokens, report.entity_spans),
        "II": lambda: type2_edges(report.findings_tokens, report.entity_spans),
        "III": lambda: type3_edges(report.findings_tokens,
                                   report.dependency_arcs, occurrences),
    }
    for et in EDGE_TYPES:
        if et not in enabled:
            continue
        for pair in per_type[et]():
            u, v = sorted(pair, key=order.get)
            typed.add((u, v, et))
    n = len(nodes)
    adjacency = np.eye(n)
    for u, v, _ in typed:
        adjacency[order[u], order[v]] = 1.0
        adjacency[order[v], order[u]] = 1.0
    return WordGraph(nodes, occurrences, frozenset(typed), adjacency)


def normalized_adjacency(adjacency):
    """Symmetric normalization D^{-1/2} A D^{-1/2} (A already has self-loops)."""
    deg = adjacency.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    return adjacency * inv_sqrt[:, None] * inv_sqrt[None, :]


def graph_stats(reports, edge_types=EDGE_TYPES):
    """Split-level averages: report count, lengths, sentences, typed edges.

    The edge average counts distinct typed edges (self-loops and the
    symmetric duplicates excluded).
    """
    if not reports:
        raise CorpusError("graph_stats needs a non-empty split")
    n = len(reports)
    afl = sum(len(r.findings_tokens) for r in reports) / n
    ail = sum(len(r.impression_tokens) for r in reports) / n
    afs = sum(count_sentences(r.findings_tokens) for r in reports) / n
    ais = sum(count_sentences(r.impression_tokens) for r in reports) / n
    afe = sum(len(build_graph(r, edge_types).typed_edges) for r in reports) / n
    return {"reports": n, "afl": afl, "afs": afs, "afe": afe,
            "ail": ail, "ais": ais}


def write_graphs(reports, path, edge_types=EDGE_TYPES):
    """Dump per-report graphs as JSONL of {id, nodes, typed_edges}."""
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            graph = build_graph(report, edge_types)
            fh.write(json.dumps({
                "id": report.id,
                "nodes": list(graph.nodes),
                "typed_edges": sorted([u, v, t] for u, v, t in graph.typed_edges),
            }, sort_keys=True) + "\n")
