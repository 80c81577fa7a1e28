"""Word-graph construction: documented edge examples, a brute-force
position-pair oracle over random annotated findings, and matrix properties."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphsum.corpus import DependencyArc, EntitySpan, Report
from graphsum.wordgraph import (
    EDGE_TYPES,
    build_graph,
    collect_nodes,
    graph_stats,
    normalized_adjacency,
    resolve_modifier_target,
    write_graphs,
)

from conftest import fig_style_report, random_report

MODIFIER_TO_BASE = {"anatomy_modifier": "anatomy",
                    "observation_modifier": "observation",
                    "uncertainty": "observation"}


# -- independent oracle: decide every edge from token-position pairs -------------


def _oracle_resolve(spans, idx):
    mod = spans[idx]
    base = MODIFIER_TO_BASE.get(mod.category)
    if base is None:
        return None
    if mod.target is not None and 0 <= mod.target < len(spans) \
            and spans[mod.target].category == base:
        return mod.target
    candidates = []
    for j, cand in enumerate(spans):
        if j == idx or cand.category != base:
            continue
        overlap = mod.start < cand.end and cand.start < mod.end
        if overlap:
            dist = 0
        elif mod.end <= cand.start:
            dist = (cand.start - mod.end) + 1
        else:
            dist = (mod.start - cand.end) + 1
        candidates.append((dist, cand.start, j))
    if not candidates:
        return None
    return min(candidates)[2]


def brute_force_edges(report, edge_types=EDGE_TYPES):
    words = report.findings_tokens
    spans = report.entity_spans
    edges = set()
    if "I" in edge_types:
        for s in spans:
            for p in range(s.start, s.end - 1):
                if words[p] != words[p + 1]:
                    edges.add((frozenset((words[p], words[p + 1])), "I"))
    if "II" in edge_types:
        for i, s in enumerate(spans):
            j = _oracle_resolve(spans, i)
            if j is None:
                continue
            for p in range(s.start, s.end):
                for q in range(spans[j].start, spans[j].end):
                    if words[p] != words[q]:
                        edges.add((frozenset((words[p], words[q])), "II"))
    if "III" in edge_types:
        covered = set()
        for s in spans:
            covered.update(range(s.start, s.end))
        for arc in report.dependency_arcs:
            if arc.head >= 0 and arc.head in covered and arc.dep in covered \
                    and words[arc.head] != words[arc.dep]:
                edges.add((frozenset((words[arc.head], words[arc.dep])), "III"))
    return edges


def as_unordered(graph):
    return {(frozenset((u, v)), t) for u, v, t in graph.typed_edges}


# -- documented examples -----------------------------------------------------------


def test_reference_fixture_produces_exactly_the_three_documented_edges():
    g = build_graph(fig_style_report())
    assert as_unordered(g) == {
        (frozenset(("endotracheal", "tube")), "I"),
        (frozenset(("moderate", "effusion")), "II"),
        (frozenset(("effusion", "left")), "III"),
    }


def test_repeated_word_merges_into_one_node():
    g = build_graph(fig_style_report())
    assert g.nodes.count("effusion") == 1
    assert g.node_occurrences["effusion"] == (13, 15)
    assert len(g.nodes) == 5


def test_type1_links_adjacent_words_of_multiword_entity():
    r = Report("t1", ("right", "lower", "lobe", "clear", ".", "a", "b", "c",
                      "d", "e"), ("ok", "."),
               (EntitySpan(0, 3, "anatomy"),), ())
    g = build_graph(r, ("I",))
    assert as_unordered(g) == {(frozenset(("right", "lower")), "I"),
                               (frozenset(("lower", "lobe")), "I")}


def test_type1_skips_identical_adjacent_words():
    r = Report("t1b", ("very", "very", "large", "x", "y", "z", "w", "q", "r",
                       "s"), ("ok", "."),
               (EntitySpan(0, 3, "observation"),), ())
    g = build_graph(r, ("I",))
    assert as_unordered(g) == {(frozenset(("very", "large")), "I")}
    assert g.adjacency[g.node_index("very"), g.node_index("very")] == 1.0


def test_type2_respects_annotated_target():
    toks = ("mild", "edema", "and", "large", "effusion", ".", "x", "y", "z", "w")
    r = Report("t2", toks, ("ok", "."),
               (EntitySpan(0, 1, "observation_modifier", target=2),
                EntitySpan(1, 2, "observation"),
                EntitySpan(4, 5, "observation")), ())
    g = build_graph(r, ("II",))
    # annotated target points past the nearer observation
    assert as_unordered(g) == {(frozenset(("mild", "effusion")), "II")}


def test_type2_falls_back_to_nearest_when_target_category_mismatches():
    toks = ("mild", "edema", "and", "large", "effusion", ".", "x", "y", "z", "w")
    r = Report("t2b", toks, ("ok", "."),
               (EntitySpan(0, 1, "observation_modifier", target=1),
                EntitySpan(1, 2, "anatomy"),
                EntitySpan(4, 5, "observation")), ())
    g = build_graph(r, ("II",))
    assert as_unordered(g) == {(frozenset(("mild", "effusion")), "II")}


def test_type2_nearest_tie_breaks_leftward():
    toks = ("edema", "mild", "opacity", "in", "lung", "q", "r", "s", "t", "u")
    r = Report("t2c", toks, ("ok", "."),
               (EntitySpan(0, 1, "observation"),
                EntitySpan(1, 2, "observation_modifier"),
                EntitySpan(2, 3, "observation")), ())
    g = build_graph(r, ("II",))
    assert as_unordered(g) == {(frozenset(("mild", "edema")), "II")}


def test_uncertainty_attaches_to_observation():
    toks = ("possible", "pneumonia", "in", "the", "lung", "a", "b", "c", "d", "e")
    r = Report("t2d", toks, ("ok", "."),
               (EntitySpan(0, 1, "uncertainty"),
                EntitySpan(1, 2, "observation"),
                EntitySpan(4, 5, "anatomy")), ())
    g = build_graph(r, ("II",))
    assert as_unordered(g) == {(frozenset(("possible", "pneumonia")), "II")}


def test_modifier_without_candidate_yields_no_edge():
    toks = ("mild", "haze", "x", "y", "z", "a", "b", "c", "d", "e")
    r = Report("t2e", toks, ("ok", "."),
               (EntitySpan(0, 1, "observation_modifier"),
                EntitySpan(4, 5, "anatomy")), ())
    assert build_graph(r, ("II",)).typed_edges == frozenset()
    assert resolve_modifier_target(r.entity_spans, 0) is None


def test_type3_requires_both_endpoints_covered():
    toks = ("large", "heart", "with", "clear", "lungs", "a", "b", "c", "d", "e")
    r = Report("t3", toks, ("ok", "."),
               (EntitySpan(1, 2, "anatomy"), EntitySpan(4, 5, "anatomy")),
               (DependencyArc(1, 4, "conj"),    # heart - lungs, both nodes
                DependencyArc(1, 0, "amod"),    # large not an entity word
                DependencyArc(-1, 1, "root")))  # virtual root ignored
    g = build_graph(r, ("III",))
    assert as_unordered(g) == {(frozenset(("heart", "lungs")), "III")}


def test_unknown_edge_type_rejected():
    with pytest.raises(ValueError, match="edge type"):
        build_graph(fig_style_report(), ("I", "IV"))


def test_edge_type_subsets_partition_the_full_set():
    r = fig_style_report()
    full = as_unordered(build_graph(r))
    union = set()
    for et in EDGE_TYPES:
        part = as_unordered(build_graph(r, (et,)))
        assert part <= full
        union |= part
    assert union == full


def test_empty_annotation_gives_empty_graph():
    r = Report("e", tuple("a b c d e f g h i j".split()), ("x", "y"), (), ())
    g = build_graph(r)
    assert g.is_empty and g.nodes == () and g.adjacency.shape == (0, 0)


# -- adjacency matrix ----------------------------------------------------------------


def test_adjacency_symmetric_with_unit_diagonal():
    g = build_graph(fig_style_report())
    a = g.adjacency
    np.testing.assert_array_equal(a, a.T)
    np.testing.assert_array_equal(np.diag(a), np.ones(len(g.nodes)))
    assert set(np.unique(a)) <= {0.0, 1.0}


def test_normalized_adjacency_hand_case():
    # path graph on 3 nodes, self-loops included: degrees 2, 3, 2
    a = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]])
    n = normalized_adjacency(a)
    np.testing.assert_allclose(n[0, 0], 0.5)
    np.testing.assert_allclose(n[1, 1], 1.0 / 3.0)
    np.testing.assert_allclose(n[0, 1], 1.0 / np.sqrt(6.0))
    np.testing.assert_allclose(n[0, 2], 0.0)
    np.testing.assert_array_equal(n, n.T)


def test_collect_nodes_orders_by_first_coverage():
    toks = ("b", "a", "c", "a", "x", "y", "z", "w", "v", "u")
    spans = (EntitySpan(3, 4, "anatomy"), EntitySpan(0, 2, "observation"),
             EntitySpan(2, 3, "anatomy"))
    nodes, occ = collect_nodes(toks, spans)
    assert nodes == ("b", "a", "c")
    assert occ["a"] == (1, 3)


# -- the 200-case brute-force comparison -----------------------------------------------


def test_matches_brute_force_enumerator_on_random_findings():
    rng = np.random.default_rng(1234)
    pool = ["heart", "lung", "mild", "left", "effusion", "opacity",
            "clear", "the", "is", "."]
    checked = 0
    for i in range(200):
        r = random_report(rng, pool, report_id=f"bf{i}")
        g = build_graph(r)
        assert as_unordered(g) == brute_force_edges(r), f"case {i}: {r}"
        checked += 1
    assert checked == 200


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2 ** 31 - 1))
def test_property_graph_is_deterministic_and_symmetric(seed):
    rng = np.random.default_rng(seed)
    pool = ["a", "b", "c", "d", "e"]
    r = random_report(rng, pool)
    g1 = build_graph(r)
    g2 = build_graph(r)
    assert g1.nodes == g2.nodes
    assert g1.typed_edges == g2.typed_edges
    np.testing.assert_array_equal(g1.adjacency, g2.adjacency)
    np.testing.assert_array_equal(g1.adjacency, g1.adjacency.T)
    if len(g1.nodes):
        np.testing.assert_array_equal(np.diag(g1.adjacency),
                                      np.ones(len(g1.nodes)))


# -- statistics and export ---------------------------------------------------------------


def test_graph_stats_single_report():
    r = fig_style_report()
    stats = graph_stats([r])
    assert stats["reports"] == 1
    assert stats["afe"] == 3.0
    assert stats["afl"] == 19.0
    assert stats["ail"] == 4.0
    assert stats["afs"] == 3.0
    assert stats["ais"] == 1.0


def test_graph_stats_averages_two_reports():
    r1 = fig_style_report()
    r2 = Report("plain", tuple("a b c d e f g h i j".split()), ("x", "y"),
                (), ())
    stats = graph_stats([r1, r2])
    assert stats["reports"] == 2
    assert stats["afe"] == 1.5       # (3 + 0) / 2
    assert stats["afl"] == 14.5      # (19 + 10) / 2


def test_graph_stats_empty_split_errors():
    with pytest.raises(Exception, match="empty"):
        graph_stats([])


def test_write_graphs_jsonl(tmp_path):
    path = tmp_path / "graphs.jsonl"
    write_graphs([fig_style_report()], path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 1
    row = json.loads(lines[0])
    assert row["id"] == "fig1"
    assert row["nodes"] == ["endotracheal", "tube", "moderate", "left",
                            "effusion"]
    assert ["endotracheal", "tube", "I"] in row["typed_edges"]
    assert len(row["typed_edges"]) == 3
