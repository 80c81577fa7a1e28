"""Seeded synthetic corpora with planted entity and relation structure.

Each report describes one key finding (modifier + observation inside a
modified anatomy) wrapped in filler sentences; the impression restates the
key finding. Impression words are drawn from annotated source words, so a
model that reads the word graph and can copy has a real advantage, which is
what the end-to-end fixtures need to demonstrate.
"""

from __future__ import annotations

import numpy as np

from .corpus import DependencyArc, EntitySpan, Report

_OBS_MODS = ("mild", "moderate", "severe", "small", "large", "trace")
_OBSERVATIONS = ("effusion", "opacity", "consolidation", "edema",
                 "pneumothorax", "fracture", "enlargement", "congestion")
_ANAT_MODS = ("left", "right", "upper", "lower", "bilateral")
_ANATOMIES = ("heart", "lung", "pleura", "mediastinum", "abdomen",
              "spine", "diaphragm", "aorta")
_UNCERTAIN = ("possible", "probable", "suspected")


def _key_sentence(om, obs, am, anat, base, entities, arcs):
    tokens = ["there", "is", "a", om, obs, "in", "the", am, anat, "."]
    om_pos, obs_pos, am_pos, anat_pos = base + 3, base + 4, base + 7, base + 8
    first = len(entities)
    entities.append(EntitySpan(om_pos, om_pos + 1, "observation_modifier",
                               target=first + 1))
    entities.append(EntitySpan(obs_pos, obs_pos + 1, "observation"))
    entities.append(EntitySpan(am_pos, am_pos + 1, "anatomy_modifier",
                               target=first + 3))
    entities.append(EntitySpan(anat_pos, anat_pos + 1, "anatomy"))
    arcs.append(DependencyArc(obs_pos, om_pos, "amod"))
    arcs.append(DependencyArc(anat_pos, am_pos, "amod"))
    arcs.append(DependencyArc(obs_pos, anat_pos, "nmod"))
    return tokens


def _stable_sentence(anat, base, entities, arcs):
    tokens = ["the", anat, "remains", "stable", "."]
    entities.append(EntitySpan(base + 1, base + 2, "anatomy"))
    arcs.append(DependencyArc(base + 3, base + 1, "nsubj"))
    return tokens


def _negated_sentence(obs, base, entities, arcs):
    tokens = ["no", obs, "is", "seen", "."]
    entities.append(EntitySpan(base + 1, base + 2, "observation"))
    return tokens


def _hedged_sentence(unc, obs, base, entities, arcs):
    tokens = [unc, obs, "noted", "."]
    entities.append(EntitySpan(base, base + 1, "uncertainty"))
    entities.append(EntitySpan(base + 1, base + 2, "observation"))
    arcs.append(DependencyArc(base + 1, base, "amod"))
    return tokens


def synthetic_corpus(n, seed=7, prefix="syn"):
    """n reports with distinct key findings, deterministic for a seed."""
    rng = np.random.default_rng(seed)
    combos = [(om, obs, am, anat)
              for om in _OBS_MODS for obs in _OBSERVATIONS
              for am in _ANAT_MODS for anat in _ANATOMIES]
    if n > len(combos):
        raise ValueError(f"at most {len(combos)} distinct reports available")
    picks = rng.choice(len(combos), size=n, replace=False)
    reports = []
    for i, pick in enumerate(picks):
        om, obs, am, anat = combos[pick]
        entities, arcs, tokens = [], [], []
        tokens += _key_sentence(om, obs, am, anat, 0, entities, arcs)
        extra = rng.integers(0, 3)
        if extra == 0:
            other = _ANATOMIES[rng.integers(len(_ANATOMIES))]
            tokens += _stable_sentence(other, len(tokens), entities, arcs)
        elif extra == 1:
            other = _OBSERVATIONS[rng.integers(len(_OBSERVATIONS))]
            tokens += _negated_sentence(other, len(tokens), entities, arcs)
        else:
            unc = _UNCERTAIN[rng.integers(len(_UNCERTAIN))]
            other = _OBSERVATIONS[rng.integers(len(_OBSERVATIONS))]
            tokens += _hedged_sentence(unc, other, len(tokens), entities, arcs)
        impression = [om, obs, "in", "the", am, anat, "."]
        reports.append(Report(f"{prefix}-{i:04d}", tuple(tokens),
                              tuple(impression), tuple(entities), tuple(arcs)))
        reports[-1].validate()
    return reports


def training_fixture():
    """The 32-pair overfitting corpus used by the end-to-end checks."""
    return synthetic_corpus(32, seed=7)


def gradcheck_fixture():
    """Three small annotated reports for finite-difference runs."""
    return synthetic_corpus(3, seed=11, prefix="grad")
