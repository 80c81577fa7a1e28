"""Command-line entry point.

Commands: build-graphs, stats, train, generate, evaluate, ablate-edges,
grad-check. Shared flags (--config, --seed, --edge-types, --variant, --gnn,
--copy, --out) override values from the config file.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical-check
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ConfigError, load_config_file, make_config
from .corpus import CorpusError, build_vocabulary, filter_corpus, load_corpus
from .inference_eval import (
    evaluate,
    generate,
    metrics_json,
    render_metrics_table,
    write_bucket_csv,
)
from .model import prepare_example
from .numerics import finite_difference_check
from .synthetic import gradcheck_fixture
from .training import CheckpointError, example_loss, load_model, train
from .wordgraph import graph_stats, write_graphs

EDGE_SUBSETS = (("I",), ("II",), ("III",), ("I", "II"), ("I", "III"),
                ("II", "III"), ("I", "II", "III"))

GRAD_CHECK_TOLERANCE = 1e-4

# compact sizes: gradient correctness does not depend on layer width, and
# the finite-difference sweep is quadratic-ish in it
_GRAD_CHECK_SIZES = dict(emb_dim=12, enc_hidden=8, enc_layers=2, dec_hidden=16,
                         graph_hidden=12, attn_dim=10, d_model=16, ff_dim=32,
                         num_layers=2, num_heads=2, dropout=0.1)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="graphsum",
        description="Word-graph guided radiology impression generation.")
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--seed", type=int, help="random seed override")
    parser.add_argument("--edge-types", help="comma list, e.g. I,II,III")
    parser.add_argument("--variant", choices=("lstm", "transformer"))
    parser.add_argument("--gnn", choices=("gcn", "gat", "off"))
    parser.add_argument("--copy", choices=("on", "off"))
    parser.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graphs", help="write per-report word graphs as JSONL")
    p.add_argument("corpus")
    p = sub.add_parser("stats", help="print corpus summary statistics")
    p.add_argument("corpus")
    p = sub.add_parser("train", help="fit a summarizer")
    p.add_argument("train_corpus")
    p.add_argument("val_corpus")
    p = sub.add_parser("generate", help="decode impressions for a corpus")
    p.add_argument("checkpoint")
    p.add_argument("corpus")
    p.add_argument("--mode", choices=("greedy", "beam"), default="greedy")
    p.add_argument("--max-len", type=int, default=None)
    p = sub.add_parser("evaluate", help="score generated impressions with ROUGE")
    p.add_argument("checkpoint")
    p.add_argument("corpus")
    p.add_argument("--mode", choices=("greedy", "beam"), default="greedy")
    p = sub.add_parser("ablate-edges", help="train/evaluate every edge-type subset")
    p.add_argument("train_corpus")
    p.add_argument("val_corpus")
    p = sub.add_parser("grad-check", help="finite-difference gradient audit")
    p.add_argument("--max-coords", type=int, default=8,
                   help="coordinates sampled per parameter")
    return parser


def _config_from_args(args, extra=None):
    file_overrides = load_config_file(args.config) if args.config else {}
    cli = {}
    if args.seed is not None:
        cli["seed"] = args.seed
    if args.edge_types is not None:
        cli["edge_types"] = args.edge_types
    if args.variant is not None:
        cli["variant"] = args.variant
    if args.gnn is not None:
        cli["gnn"] = args.gnn
    if args.copy is not None:
        cli["copy"] = args.copy == "on"
    if extra:
        cli.update(extra)
    return make_config(file_overrides, cli)


def _load_split(path):
    return filter_corpus(load_corpus(path))


def _cmd_build_graphs(args):
    config = _config_from_args(args)
    reports = _load_split(args.corpus)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "graphs.jsonl")
    write_graphs(reports, out_path, config.edge_types)
    print(f"wrote {len(reports)} graphs to {out_path}")
    return 0


def _cmd_stats(args):
    config = _config_from_args(args)
    reports = _load_split(args.corpus)
    stats = graph_stats(reports, config.edge_types)
    rows = (("reports", f"{stats['reports']}"),
            ("avg findings tokens", f"{stats['afl']:.2f}"),
            ("avg findings sentences", f"{stats['afs']:.2f}"),
            ("avg impression tokens", f"{stats['ail']:.2f}"),
            ("avg impression sentences", f"{stats['ais']:.2f}"),
            ("avg graph edges", f"{stats['afe']:.2f}"))
    width = max(len(k) for k, _ in rows)
    for key, val in rows:
        print(f"{key:<{width}}  {val:>8}")
    return 0


def _cmd_train(args):
    config = _config_from_args(args)
    train_reports = _load_split(args.train_corpus)
    val_reports = _load_split(args.val_corpus)
    vocab = build_vocabulary(train_reports, min_count=config.min_count)
    os.makedirs(args.out, exist_ok=True)
    vocab.save(os.path.join(args.out, "vocab.json"))
    train(train_reports, val_reports, vocab, config, out_dir=args.out,
          quiet=False)
    print(f"checkpoints and log written to {args.out}")
    return 0


def _load_model_and_vocab(args):
    from .corpus import Vocabulary
    model = load_model(args.checkpoint)
    vocab_path = os.path.join(os.path.dirname(args.checkpoint) or ".", "vocab.json")
    if not os.path.exists(vocab_path):
        raise CorpusError(f"no vocab.json beside checkpoint: {vocab_path}")
    vocab = Vocabulary.load(vocab_path)
    if len(vocab) != model.vocab_size:
        raise CheckpointError("vocabulary size does not match the checkpoint")
    return model, vocab


def _cmd_generate(args):
    model, vocab = _load_model_and_vocab(args)
    reports = _load_split(args.corpus)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "generated.jsonl")
    with open(out_path, "w", encoding="utf-8") as fh:
        for r in reports:
            tokens = generate(model, vocab, r, max_len=args.max_len,
                              mode=args.mode)
            fh.write(json.dumps({"id": r.id, "impression": " ".join(tokens)},
                                sort_keys=True) + "\n")
    print(f"wrote {len(reports)} impressions to {out_path}")
    return 0


def _cmd_evaluate(args):
    model, vocab = _load_model_and_vocab(args)
    reports = _load_split(args.corpus)
    report = evaluate(model, vocab, reports, mode=args.mode)
    os.makedirs(args.out, exist_ok=True)
    blob = metrics_json(report)
    with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(blob + "\n")
    with open(os.path.join(args.out, "metrics.txt"), "w", encoding="utf-8") as fh:
        fh.write(render_metrics_table(report) + "\n")
    write_bucket_csv(report, os.path.join(args.out, "buckets.csv"))
    print(blob)
    return 0


def _cmd_ablate_edges(args):
    train_reports = _load_split(args.train_corpus)
    val_reports = _load_split(args.val_corpus)
    rows = []
    for subset in EDGE_SUBSETS:
        config = _config_from_args(args, extra={"edge_types": subset})
        vocab = build_vocabulary(train_reports, min_count=config.min_count)
        model, _ = train(train_reports, val_reports, vocab, config)
        result = evaluate(model, vocab, val_reports)
        rows.append({"edges": "+".join(subset),
                     "rouge1": result["overall"]["rouge1"]})
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "ablation.json"), "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
    print(f"{'edges':<10} {'val R-1':>8}")
    for row in rows:
        print(f"{row['edges']:<10} {row['rouge1']:>8.4f}")
    return 0


def _cmd_grad_check(args):
    sizes = dict(_GRAD_CHECK_SIZES)
    file_overrides = load_config_file(args.config) if args.config else {}
    variant = args.variant or file_overrides.get("variant", "lstm")
    if variant == "transformer":
        # the dot-product guidance needs node vectors as wide as the stream
        sizes["graph_hidden"] = sizes["d_model"]
        sizes["attn_dim"] = sizes["d_model"]
    config = _config_from_args(args, extra=sizes)
    reports = gradcheck_fixture()
    vocab = build_vocabulary(reports)
    from .model import Summarizer
    model = Summarizer(config, len(vocab))
    preps = [prepare_example(r, vocab, config) for r in reports]

    def loss_fn():
        total = None
        for prep in preps:
            term = example_loss(model, prep, training=True,
                                rng=np.random.default_rng(1234))
            total = term if total is None else total + term
        return total * (1.0 / len(preps))

    worst = finite_difference_check(loss_fn, model.parameters(),
                                    rng=np.random.default_rng(config.seed),
                                    max_coords_per_param=args.max_coords)
    status = "ok" if worst <= GRAD_CHECK_TOLERANCE else "FAIL"
    print(f"max relative error {worst:.3e} "
          f"(tolerance {GRAD_CHECK_TOLERANCE:.0e}) {status}")
    return 0 if worst <= GRAD_CHECK_TOLERANCE else 4


_COMMANDS = {
    "build-graphs": _cmd_build_graphs,
    "stats": _cmd_stats,
    "train": _cmd_train,
    "generate": _cmd_generate,
    "evaluate": _cmd_evaluate,
    "ablate-edges": _cmd_ablate_edges,
    "grad-check": _cmd_grad_check,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, CorpusError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
