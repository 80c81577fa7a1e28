"""Word-graph guided abstractive summarization for radiology findings.

The pipeline: annotated reports are parsed into typed word graphs, a
sequence encoder reads the findings, twin graph encoders distill background
and step-wise guidance signals, and a pointer-generator decoder writes the
impression, able to copy out-of-vocabulary source words.
"""

from .config import TrainConfig, default_config, config_hash, load_config_file
from .corpus import (
    CorpusError,
    Report,
    Vocabulary,
    build_vocabulary,
    decode_ids,
    encode_with_copy,
    filter_corpus,
    load_corpus,
    tokenize,
)
from .model import Summarizer, prepare_example
from .wordgraph import WordGraph, build_graph, graph_stats

__all__ = [
    "TrainConfig",
    "default_config",
    "config_hash",
    "load_config_file",
    "CorpusError",
    "Report",
    "Vocabulary",
    "build_vocabulary",
    "decode_ids",
    "encode_with_copy",
    "filter_corpus",
    "load_corpus",
    "tokenize",
    "Summarizer",
    "prepare_example",
    "WordGraph",
    "build_graph",
    "graph_stats",
]

__version__ = "0.1.0"
