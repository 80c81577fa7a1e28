"""Run configuration: variant/gnn/copy switches, sizes, optimizer settings.

Config files are flat ``key = value`` text; values use JSON syntax where it
matters (numbers, true/false) and bare strings otherwise. Command line
overrides win over file values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

VARIANTS = ("lstm", "transformer")
GNN_KINDS = ("gcn", "gat", "off")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    variant: str = "lstm"
    gnn: str = "gat"
    copy: bool = True
    edge_types: tuple = ("I", "II", "III")
    seed: int = 0
    # corpus
    min_count: int = 1
    max_findings_len: int = 200
    max_impression_len: int = 50
    # lstm stack
    emb_dim: int = 100
    enc_hidden: int = 100      # per direction
    enc_layers: int = 2
    dec_hidden: int = 200
    # transformer stack
    d_model: int = 512
    ff_dim: int = 2048
    num_layers: int = 6
    num_heads: int = 8
    # graph encoder and attention
    graph_hidden: int = 200
    graph_layers: int = 2
    attn_dim: int = 200
    scaled_guidance: bool = False   # apply 1/sqrt(d) in the dot guidance
    guidance_query: str = "cell"    # cell | hidden
    update_input: str = "guidance"  # guidance | graph_mean
    # training
    lr: float = 0.001
    dropout: float = 0.5
    batch_size: int = 8
    epochs: int = 30
    grad_clip: float = 2.0
    val_every: int = 1
    # decoding
    beam_width: int = 4
    max_gen_len: int = 50

    def validate(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.gnn not in GNN_KINDS:
            raise ConfigError(f"gnn must be one of {GNN_KINDS}")
        for et in self.edge_types:
            if et not in ("I", "II", "III"):
                raise ConfigError(f"unknown edge type {et!r}")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.guidance_query not in ("cell", "hidden"):
            raise ConfigError("guidance_query must be 'cell' or 'hidden'")
        if self.update_input not in ("guidance", "graph_mean"):
            raise ConfigError("update_input must be 'guidance' or 'graph_mean'")
        if self.variant == "transformer":
            if self.num_layers < 2:
                raise ConfigError("transformer needs at least 2 decoder layers")
            if self.graph_hidden != self.d_model:
                raise ConfigError(
                    "transformer variant requires graph_hidden == d_model "
                    "(the dot-product guidance has no projection)")
            if self.d_model % self.num_heads != 0:
                raise ConfigError("d_model must divide evenly into heads")
        return self


def default_config(variant="lstm", **overrides):
    """Full-size defaults for the chosen stack, plus explicit overrides."""
    if variant == "transformer":
        base = {"variant": "transformer", "graph_hidden": 512, "attn_dim": 512}
    else:
        base = {"variant": variant}
    base.update(overrides)
    return TrainConfig(**base).validate()


def config_hash(config):
    payload = dataclasses.asdict(config)
    payload["edge_types"] = list(payload["edge_types"])
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(TrainConfig)}


def _coerce(key, raw):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if key == "edge_types":
        if isinstance(raw, (list, tuple)):
            return tuple(raw)
        parts = [p.strip() for p in str(raw).split(",") if p.strip()]
        return tuple(parts)
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError:
            pass
    ftype = _FIELD_TYPES[key]
    if ftype == "int" or ftype is int:
        return int(raw)
    if ftype == "float" or ftype is float:
        return float(raw)
    if ftype == "bool" or ftype is bool:
        if isinstance(raw, str):
            return raw.lower() in ("1", "true", "yes", "on")
        return bool(raw)
    return str(raw)


def load_config_file(path):
    """Parse a flat key = value config file into an override dict."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in line.split("=", 1))
            overrides[key] = _coerce(key, raw)
    return overrides


def make_config(file_overrides=None, cli_overrides=None):
    merged = {}
    for source in (file_overrides, cli_overrides):
        if source:
            merged.update({k: _coerce(k, v) if not isinstance(v, (int, float, bool, tuple)) else v
                           for k, v in source.items()})
    variant = merged.pop("variant", "lstm")
    return default_config(variant, **merged)
