"""Impression generation (greedy and beam search) and ROUGE evaluation.

Scores use the package's own tokenization with no stemming or stopword
removal, so they are self-consistent rather than digit-comparable with
external toolkits. Corpus numbers are macro averages of per-report F1.
"""

from __future__ import annotations

import csv
import json
from collections import Counter

import numpy as np

from .corpus import BOS, EOS, UNK, decode_ids
from .model import prepare_example
from .numerics import no_grad

LENGTH_BUCKETS = ((15, 20), (20, 25), (25, 30), (30, 35), (35, 41))


def _bucket_label(lo, hi):
    # the final bucket is closed on the right
    return f"[{lo},{hi})" if hi < 41 else f"[{lo},{hi - 1}]"


# -- decoding -----------------------------------------------------------------


def _next_input(token_id, vocab_size):
    """Copied OOV ids have no embedding row; feed UNK on the next step."""
    return token_id if token_id < vocab_size else UNK


def greedy_decode(model, cache, max_len):
    out = []
    state = model.start_state(cache)
    prev = BOS
    with no_grad():
        for _ in range(max_len):
            probs, state, _ = model.step(cache, state, prev)
            token = int(np.argmax(probs.data[0]))
            if token == EOS:
                break
            out.append(token)
            prev = _next_input(token, model.vocab_size)
    return out


def beam_decode(model, cache, max_len, width):
    """Length-normalized beam search; ``width`` hypotheses kept per step."""
    if width < 1:
        raise ValueError("beam width must be at least 1")
    start = model.start_state(cache)
    # each hypothesis: (ids tuple, sum log prob, state, prev input id)
    alive = [((), 0.0, start, BOS)]
    finished = []
    with no_grad():
        for _ in range(max_len):
            candidates = []
            for ids, score, state, prev in alive:
                probs, new_state, _ = model.step(cache, state, prev)
                row = probs.data[0]
                # stable order so width 1 follows exactly the greedy path
                top = np.argsort(-row, kind="stable")[:width]
                for token in top:
                    token = int(token)
                    logp = float(np.log(max(row[token], 1e-300)))
                    candidates.append((ids + (token,), score + logp, new_state))
            candidates.sort(key=lambda c: c[1] / len(c[0]), reverse=True)
            alive = []
            for ids, score, state in candidates:
                if ids[-1] == EOS:
                    finished.append((ids[:-1], score, len(ids)))
                elif len(alive) < width:
                    alive.append((ids, score, state,
                                  _next_input(ids[-1], model.vocab_size)))
                if len(alive) >= width and len(finished) >= width:
                    break
            if not alive:
                break
    for ids, score, state, _ in alive:
        finished.append((ids, score, max(len(ids), 1)))
    if not finished:
        return []
    best = max(finished, key=lambda f: f[1] / f[2])
    return list(best[0])


def generate(model, vocab, source, max_len=None, mode="greedy", beam_width=None):
    """Produce impression tokens for a report (or an already prepared one)."""
    prep = source if hasattr(source, "src_input_ids") else prepare_example(
        source, vocab, model.config)
    if max_len is None:
        max_len = model.config.max_gen_len
    with no_grad():
        cache = model.encode(prep)
        if mode == "greedy":
            ids = greedy_decode(model, cache, max_len)
        elif mode == "beam":
            width = beam_width or model.config.beam_width
            ids = beam_decode(model, cache, max_len, width)
        else:
            raise ValueError(f"unknown decoding mode {mode!r}")
    return decode_ids(ids, vocab, prep.oov_tokens)


# -- ROUGE ---------------------------------------------------------------------


def _f1(p, r):
    return 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0


def rouge_n(ref_tokens, hyp_tokens, n):
    """Clipped n-gram overlap; returns (precision, recall, f1)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ref_grams = Counter(tuple(ref_tokens[i:i + n])
                        for i in range(len(ref_tokens) - n + 1))
    hyp_grams = Counter(tuple(hyp_tokens[i:i + n])
                        for i in range(len(hyp_tokens) - n + 1))
    if not ref_grams or not hyp_grams:
        return (0.0, 0.0, 0.0)
    overlap = sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())
    p = overlap / sum(hyp_grams.values())
    r = overlap / sum(ref_grams.values())
    return (p, r, _f1(p, r))


def _lcs_length(a, b):
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(ref_tokens, hyp_tokens):
    """Longest-common-subsequence overlap; returns (precision, recall, f1)."""
    if not ref_tokens or not hyp_tokens:
        return (0.0, 0.0, 0.0)
    lcs = _lcs_length(ref_tokens, hyp_tokens)
    p = lcs / len(hyp_tokens)
    r = lcs / len(ref_tokens)
    return (p, r, _f1(p, r))


def score_pair(ref_tokens, hyp_tokens):
    return {
        "rouge1": rouge_n(ref_tokens, hyp_tokens, 1),
        "rouge2": rouge_n(ref_tokens, hyp_tokens, 2),
        "rougeL": rouge_l(ref_tokens, hyp_tokens),
    }


# -- corpus evaluation ----------------------------------------------------------


def evaluate_pairs(pairs):
    """Aggregate (ref tokens, hyp tokens) pairs into the metric report.

    Macro-averaged F1 overall and within reference-length buckets; buckets
    with no members are left out of the report entirely.
    """
    if not pairs:
        raise ValueError("cannot evaluate an empty corpus")
    per_pair = [(len(ref), score_pair(ref, hyp)) for ref, hyp in pairs]

    def mean_f1(items, key):
        return float(np.mean([s[key][2] for _, s in items]))

    report = {
        "count": len(per_pair),
        "overall": {k: mean_f1(per_pair, k) for k in ("rouge1", "rouge2", "rougeL")},
        "buckets": {},
    }
    for lo, hi in LENGTH_BUCKETS:
        members = [(n, s) for n, s in per_pair if lo <= n < hi]
        if not members:
            continue
        report["buckets"][_bucket_label(lo, hi)] = {
            "count": len(members),
            **{k: mean_f1(members, k) for k in ("rouge1", "rouge2", "rougeL")},
        }
    return report


def evaluate(model, vocab, reports, max_len=None, mode="greedy"):
    """Generate for every report and score against its impression."""
    if not reports:
        raise ValueError("cannot evaluate an empty corpus")
    pairs = []
    for r in reports:
        hyp = generate(model, vocab, r, max_len=max_len, mode=mode)
        pairs.append((list(r.impression_tokens), hyp))
    return evaluate_pairs(pairs)


def render_metrics_table(report):
    """Aligned plain-text view of the evaluate() report."""
    rows = [("overall", report["count"], report["overall"])]
    for label, entry in report["buckets"].items():
        rows.append((label, entry["count"],
                     {k: entry[k] for k in ("rouge1", "rouge2", "rougeL")}))
    lines = [f"{'split':<10} {'n':>5} {'R-1':>8} {'R-2':>8} {'R-L':>8}"]
    for label, n, scores in rows:
        lines.append(f"{label:<10} {n:>5} {scores['rouge1']:>8.4f} "
                     f"{scores['rouge2']:>8.4f} {scores['rougeL']:>8.4f}")
    return "\n".join(lines)


def write_bucket_csv(report, path):
    """Per-bucket R-1 CSV for external plotting.

    Labels contain commas, so rows go through a real CSV writer."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bucket", "count", "rouge1"])
        for label, entry in report["buckets"].items():
            writer.writerow([label, entry["count"], f"{entry['rouge1']:.6f}"])


def metrics_json(report):
    return json.dumps(report, indent=2, sort_keys=True)
