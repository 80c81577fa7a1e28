"""Report data model, tokenization, filtering, vocabulary and copy encoding.

Corpus files are JSONL, one report per line with keys ``id``, ``findings``,
``impression``, ``entities`` and ``deps`` (see README for the exact schema).
All objects here are immutable after construction.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

ENTITY_CATEGORIES = (
    "anatomy",
    "observation",
    "anatomy_modifier",
    "observation_modifier",
    "uncertainty",
)

PAD, UNK, BOS, EOS = 0, 1, 2, 3
RESERVED = ("<pad>", "<unk>", "<bos>", "<eos>")

_TOKEN_RE = re.compile(r"\d+\.\d+|\w+|[^\w\s]")


class CorpusError(ValueError):
    """Raised for malformed corpus files or annotations."""


def tokenize(text):
    """Lowercase, split punctuation into standalone tokens, keep decimals.

    "Moderate left pleural effusion." -> moderate left pleural effusion .
    "3.9 cm" -> 3.9 cm
    """
    return _TOKEN_RE.findall(text.lower())


def count_sentences(tokens):
    """Number of non-empty token runs delimited by . ! ? terminators."""
    count = 0
    in_sentence = False
    for tok in tokens:
        if tok in (".", "!", "?"):
            if in_sentence:
                count += 1
            in_sentence = False
        else:
            in_sentence = True
    if in_sentence:
        count += 1
    return count


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int  # exclusive
    category: str
    target: int | None = None  # index of the modified entity, when annotated


@dataclass(frozen=True)
class DependencyArc:
    head: int  # token index, or -1 for root
    dep: int
    label: str


@dataclass(frozen=True)
class Report:
    id: str
    findings_tokens: tuple
    impression_tokens: tuple
    entity_spans: tuple = field(default_factory=tuple)
    dependency_arcs: tuple = field(default_factory=tuple)

    def validate(self):
        n = len(self.findings_tokens)
        for span in self.entity_spans:
            if not (0 <= span.start < span.end <= n):
                raise CorpusError(
                    f"report {self.id}: span [{span.start},{span.end}) outside "
                    f"findings of length {n}")
            if span.category not in ENTITY_CATEGORIES:
                raise CorpusError(
                    f"report {self.id}: unknown entity category {span.category!r}")
            if span.target is not None and not (
                    0 <= span.target < len(self.entity_spans)):
                raise CorpusError(
                    f"report {self.id}: span target {span.target} out of range")
        for arc in self.dependency_arcs:
            if arc.head == arc.dep:
                raise CorpusError(f"report {self.id}: self-arc at {arc.dep}")
            if not (0 <= arc.dep < n) or not (-1 <= arc.head < n):
                raise CorpusError(
                    f"report {self.id}: arc ({arc.head},{arc.dep}) outside "
                    f"findings of length {n}")
        return self


def report_from_json(obj):
    findings = tokenize(obj.get("findings", "") or "")
    impression = tokenize(obj.get("impression", "") or "")
    spans = tuple(
        EntitySpan(int(e["start"]), int(e["end"]), e["type"],
                   None if e.get("target") is None else int(e["target"]))
        for e in obj.get("entities", []))
    arcs = tuple(
        DependencyArc(int(d["head"]), int(d["dep"]), str(d.get("label", "dep")))
        for d in obj.get("deps", []))
    return Report(str(obj["id"]), tuple(findings), tuple(impression),
                  spans, arcs).validate()


def load_corpus(path):
    reports = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            try:
                reports.append(report_from_json(obj))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
    return reports


def filter_corpus(reports):
    """Drop incomplete reports, findings under 10 tokens, impressions under 2.

    Idempotent: applying it twice equals applying it once.
    """
    return [r for r in reports
            if len(r.findings_tokens) >= 10 and len(r.impression_tokens) >= 2]


def truncate_report(report, max_findings=200, max_impression=50):
    """Clip long reports for batching; annotations past the cut are dropped."""
    if (len(report.findings_tokens) <= max_findings
            and len(report.impression_tokens) <= max_impression):
        return report
    spans = tuple(s for s in report.entity_spans if s.end <= max_findings)
    kept = {i for i, s in enumerate(report.entity_spans) if s.end <= max_findings}
    remap = {old: new for new, old in enumerate(sorted(kept))}
    spans = tuple(
        EntitySpan(s.start, s.end, s.category,
                   remap.get(s.target) if s.target in kept else None)
        for s in spans)
    arcs = tuple(a for a in report.dependency_arcs
                 if a.dep < max_findings and a.head < max_findings)
    return Report(report.id, report.findings_tokens[:max_findings],
                  report.impression_tokens[:max_impression], spans, arcs)


class Vocabulary:
    """Token/id bijection with fixed reserved ids for PAD, UNK, BOS, EOS."""

    def __init__(self, tokens, min_count=1):
        self.min_count = min_count
        self._id_of = {tok: i for i, tok in enumerate(RESERVED)}
        self._tokens = list(RESERVED)
        for tok in tokens:
            if tok not in self._id_of:
                self._id_of[tok] = len(self._tokens)
                self._tokens.append(tok)

    def __len__(self):
        return len(self._tokens)

    def __contains__(self, token):
        return token in self._id_of

    def id_of(self, token):
        return self._id_of.get(token, UNK)

    def token_of(self, idx):
        return self._tokens[idx]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"min_count": self.min_count,
                       "tokens": self._tokens[len(RESERVED):]}, fh)

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        return cls(obj["tokens"], min_count=obj["min_count"])


def build_vocabulary(reports, min_count=1):
    """Vocabulary over both sections, keeping tokens seen >= min_count times."""
    if not reports:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    counts = Counter()
    for r in reports:
        counts.update(r.findings_tokens)
        counts.update(r.impression_tokens)
    keep = sorted((tok for tok, c in counts.items() if c >= min_count),
                  key=lambda tok: (-counts[tok], tok))
    return Vocabulary(keep, min_count=min_count)


@dataclass(frozen=True)
class CopyEncoding:
    """Extended-vocabulary encoding of one report.

    ``source_ids`` holds in-vocabulary ids, with each distinct OOV source
    token assigned one id past the vocabulary end. ``target_ids`` point into
    the same extended space so copied tokens stay supervisable.
    """

    source_ids: tuple          # extended ids, one per findings token
    source_input_ids: tuple    # in-vocabulary view (OOV -> UNK)
    target_ids: tuple          # extended ids for the impression
    target_input_ids: tuple    # in-vocabulary view for teacher forcing
    oov_tokens: tuple
    extended_size: int

    def token_for_id(self, idx, vocab):
        if idx < len(vocab):
            return vocab.token_of(idx)
        return self.oov_tokens[idx - len(vocab)]


def encode_with_copy(report, vocab):
    base = len(vocab)
    oov_index = {}
    source_ids = []
    source_input_ids = []
    for tok in report.findings_tokens:
        idx = vocab.id_of(tok)
        if idx == UNK and tok not in RESERVED:
            if tok not in oov_index:
                oov_index[tok] = base + len(oov_index)
            source_ids.append(oov_index[tok])
            source_input_ids.append(UNK)
        else:
            source_ids.append(idx)
            source_input_ids.append(idx)
    target_ids = []
    target_input_ids = []
    for tok in report.impression_tokens:
        idx = vocab.id_of(tok)
        target_input_ids.append(idx)
        if idx == UNK and tok in oov_index:
            target_ids.append(oov_index[tok])
        else:
            target_ids.append(idx)
    oov_tokens = tuple(sorted(oov_index, key=oov_index.get))
    return CopyEncoding(tuple(source_ids), tuple(source_input_ids),
                        tuple(target_ids), tuple(target_input_ids),
                        oov_tokens, base + len(oov_tokens))


def decode_ids(ids, vocab, oov_tokens=()):
    """Map (extended) ids back to surface tokens."""
    out = []
    for idx in ids:
        if idx < len(vocab):
            out.append(vocab.token_of(idx))
        else:
            out.append(oov_tokens[idx - len(vocab)])
    return out
