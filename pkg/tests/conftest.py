import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphsum.config import default_config
from graphsum.corpus import DependencyArc, EntitySpan, Report, build_vocabulary


def tiny_config(variant="lstm", **overrides):
    """Small-width settings so model tests stay fast."""
    base = dict(emb_dim=12, enc_hidden=8, enc_layers=2, dec_hidden=16,
                graph_hidden=12, attn_dim=10, dropout=0.0,
                d_model=16, ff_dim=32, num_layers=2, num_heads=2)
    if variant == "transformer":
        base["graph_hidden"] = 16
        base["attn_dim"] = 16
    base.update(overrides)
    return default_config(variant, **base)


def fig_style_report():
    """Repeated-entity findings whose graph has one edge of each type."""
    tokens = ("endotracheal tube is in standard position . there is a "
              "moderate left pleural effusion . effusion is unchanged .").split()
    report = Report(
        "fig1",
        tuple(tokens),
        ("moderate", "left", "effusion", "."),
        (
            EntitySpan(0, 2, "anatomy"),
            EntitySpan(10, 11, "observation_modifier", target=2),
            EntitySpan(13, 14, "observation"),
            EntitySpan(11, 12, "anatomy"),
            EntitySpan(15, 16, "observation"),
        ),
        (
            DependencyArc(13, 11, "amod"),
            DependencyArc(13, 12, "amod"),
        ),
    )
    report.validate()
    return report


def random_report(rng, vocab_tokens, oov_tokens=(), with_entities=True,
                  min_len=10, max_len=18, report_id="rnd"):
    """A structurally valid random report for fuzzing."""
    pool = list(vocab_tokens) + list(oov_tokens)
    n = int(rng.integers(min_len, max_len + 1))
    findings = [pool[int(rng.integers(len(pool)))] for _ in range(n)]
    m = int(rng.integers(2, 7))
    impression = [pool[int(rng.integers(len(pool)))] for _ in range(m)]
    entities = []
    arcs = []
    if with_entities:
        cats = ("anatomy", "observation", "anatomy_modifier",
                "observation_modifier", "uncertainty")
        for _ in range(int(rng.integers(0, 5))):
            start = int(rng.integers(0, n))
            end = min(n, start + int(rng.integers(1, 3)))
            entities.append(EntitySpan(start, end, cats[int(rng.integers(len(cats)))]))
        for _ in range(int(rng.integers(0, 4))):
            head = int(rng.integers(0, n))
            dep = int(rng.integers(0, n))
            if head != dep:
                arcs.append(DependencyArc(head, dep, "dep"))
    report = Report(report_id, tuple(findings), tuple(impression),
                    tuple(entities), tuple(arcs))
    report.validate()
    return report


@pytest.fixture(scope="session")
def shared_rng():
    return np.random.default_rng(20240817)
