"""Model and training configuration.

Defaults are the full-scale settings; a flat ``key = value`` config file
(see ``configs/desk.cfg``) overrides any subset of fields, which is how the
desk-scale profile shrinks layer counts and epochs for quick runs.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class ModelConfig:
    gat_layers: int = 64
    gat_heads: int = 4
    inductive_layers: int = 64
    embed_dim: int = 256
    transformer_layers: int = 6
    transformer_heads: int = 8
    dropout: float = 0.3
    lr_start: float = 2e-4
    lr_peak: float = 5e-3
    lr_final: float = 5e-7
    lambda0: float = 0.5
    epochs: int = 70
    folds: int = 10
    weight_decay: float = 1e-4
    max_devices: int = 32

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name == "dropout":
                continue
            value = getattr(self, f.name)
            if value <= 0:
                raise ValueError(f"{f.name} must be positive, got {value}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.embed_dim % self.gat_heads:
            raise ValueError("embed_dim must be divisible by gat_heads")
        if self.embed_dim % self.transformer_heads:
            raise ValueError("embed_dim must be divisible by transformer_heads")


_FIELD_TYPES = {f.name: f.type for f in fields(ModelConfig)}


def parse_config_text(text: str, base: ModelConfig | None = None) -> ModelConfig:
    """Parse a flat ``key = value`` config (``#`` comments, blank lines ok)."""
    overrides: dict[str, int | float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        caster = int if _FIELD_TYPES[key] in ("int", int) else float
        try:
            overrides[key] = caster(value)
        except ValueError:
            raise ValueError(f"line {lineno}: bad value {value!r} for {key}") from None
    return replace(base or ModelConfig(), **overrides)


def load_config(path: str, base: ModelConfig | None = None) -> ModelConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)


def desk_config() -> ModelConfig:
    """Small profile: same architecture, sized for laptop-scale experiments."""
    return ModelConfig(
        gat_layers=2,
        gat_heads=4,
        inductive_layers=2,
        embed_dim=32,
        transformer_layers=2,
        transformer_heads=4,
        dropout=0.1,
        epochs=12,
        folds=2,
    )
