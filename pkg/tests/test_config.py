"""Configuration defaults, validation, file parsing, and hashing."""

import dataclasses

import pytest

from graphsum.config import (
    ConfigError,
    TrainConfig,
    config_hash,
    default_config,
    load_config_file,
    make_config,
)


def test_recurrent_defaults_pin_documented_values():
    c = default_config()
    assert c.variant == "lstm"
    assert c.gnn == "gat"
    assert c.copy is True
    assert c.edge_types == ("I", "II", "III")
    assert (c.emb_dim, c.enc_hidden, c.enc_layers) == (100, 100, 2)
    assert (c.dec_hidden, c.graph_hidden, c.graph_layers, c.attn_dim) == \
        (200, 200, 2, 200)
    assert (c.lr, c.dropout, c.batch_size, c.epochs) == (0.001, 0.5, 8, 30)
    assert (c.grad_clip, c.beam_width, c.max_gen_len) == (2.0, 4, 50)
    assert (c.max_findings_len, c.max_impression_len) == (200, 50)


def test_transformer_defaults_align_graph_width_with_model():
    c = default_config("transformer")
    assert (c.d_model, c.ff_dim, c.num_layers, c.num_heads) == (512, 2048, 6, 8)
    assert c.graph_hidden == c.d_model == 512
    assert c.attn_dim == 512


def test_config_is_frozen():
    c = default_config()
    with pytest.raises(dataclasses.FrozenInstanceError):
        c.lr = 0.1


@pytest.mark.parametrize("overrides,message", [
    (dict(variant="quantum"), "variant"),
    (dict(gnn="sage"), "gnn"),
    (dict(edge_types=("I", "IV")), "edge type"),
    (dict(lr=0.0), "lr"),
    (dict(guidance_query="state"), "guidance_query"),
    (dict(update_input="nothing"), "update_input"),
])
def test_validate_rejects_bad_values(overrides, message):
    with pytest.raises(ConfigError, match=message):
        TrainConfig(**overrides).validate()


@pytest.mark.parametrize("overrides,message", [
    (dict(num_layers=1), "at least 2"),
    (dict(graph_hidden=256), "graph_hidden == d_model"),
    (dict(num_heads=5), "heads"),
])
def test_transformer_constraints(overrides, message):
    with pytest.raises(ConfigError, match=message):
        default_config("transformer", **overrides)


def test_load_config_file_parses_flat_keys(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment line\n"
        "\n"
        "variant = transformer   # trailing comment\n"
        "lr = 0.01\n"
        "epochs = 3\n"
        "copy = off\n"
        "edge_types = I, II\n")
    overrides = load_config_file(path)
    assert overrides == {"variant": "transformer", "lr": 0.01, "epochs": 3,
                         "copy": False, "edge_types": ("I", "II")}


def test_load_config_file_reports_line_numbers(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("lr = 0.01\njust words\n")
    with pytest.raises(ConfigError, match=":2:"):
        load_config_file(path)


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "odd.cfg"
    path.write_text("learning_rate = 0.01\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config_file(path)


def test_make_config_cli_overrides_win():
    cfg = make_config({"lr": 0.01, "epochs": 5}, {"lr": "0.5"})
    assert cfg.lr == 0.5
    assert cfg.epochs == 5


def test_make_config_coerces_cli_strings():
    cfg = make_config(None, {"edge_types": "II,III", "copy": "off",
                             "seed": 9})
    assert cfg.edge_types == ("II", "III")
    assert cfg.copy is False
    assert cfg.seed == 9


def test_config_hash_is_stable_and_sensitive():
    a = default_config()
    b = default_config()
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    assert int(config_hash(a), 16) >= 0
    c = default_config(lr=0.002)
    assert config_hash(c) != config_hash(a)
    d = default_config(edge_types=("I",))
    assert config_hash(d) != config_hash(a)
