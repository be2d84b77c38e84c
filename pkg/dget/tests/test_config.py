import os

import pytest

from dget import ModelConfig, desk_config, load_config, parse_config_text

CONFIGS_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def test_full_scale_defaults():
    cfg = ModelConfig()
    assert cfg.gat_layers == 64
    assert cfg.gat_heads == 4
    assert cfg.inductive_layers == 64
    assert cfg.embed_dim == 256
    assert cfg.transformer_layers == 6
    assert cfg.transformer_heads == 8
    assert cfg.dropout == 0.3
    assert cfg.lr_start == 2e-4
    assert cfg.lr_peak == 5e-3
    assert cfg.lr_final == 5e-7
    assert cfg.lambda0 == 0.5
    assert cfg.epochs == 70
    assert cfg.folds == 10


@pytest.mark.parametrize("bad", [
    {"gat_layers": 0},
    {"epochs": -1},
    {"dropout": 1.0},
    {"dropout": -0.1},
    {"lr_peak": 0.0},
    {"embed_dim": 30, "gat_heads": 4},   # not divisible
    {"embed_dim": 32, "transformer_heads": 5},
])
def test_invalid_config_rejected(bad):
    with pytest.raises(ValueError):
        ModelConfig(**bad)


def test_parse_overrides_and_comments():
    cfg = parse_config_text(
        """
        # comment line
        epochs = 5          # trailing comment
        dropout = 0.0
        embed_dim = 32
        gat_heads = 4
        transformer_heads = 4
        """
    )
    assert cfg.epochs == 5
    assert cfg.dropout == 0.0
    assert cfg.embed_dim == 32
    assert cfg.gat_layers == 64  # untouched default


def test_parse_errors():
    with pytest.raises(ValueError, match="unknown config key"):
        parse_config_text("no_such_key = 1")
    with pytest.raises(ValueError, match="bad value"):
        parse_config_text("epochs = many")
    with pytest.raises(ValueError, match="expected 'key = value'"):
        parse_config_text("just some words")
    with pytest.raises(ValueError):  # parsed values still validated
        parse_config_text("dropout = 1.5")


def test_desk_profile_file_matches_helper():
    cfg = load_config(os.path.join(CONFIGS_DIR, "desk.cfg"))
    assert cfg == desk_config()
    assert cfg.gat_layers < ModelConfig().gat_layers
    assert cfg.epochs < ModelConfig().epochs
