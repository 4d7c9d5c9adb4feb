"""Model hyperparameters and the named presets.

The embedding width must divide evenly by both the head count (for
spatial/temporal attention) and the channel count (for feature attention):
each head works on D/h dims, each channel token on D/C dims.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

VARIANTS = ("tstf", "space_time_only")
BLOCK_FORMS = ("post_norm", "pre_norm")


class ConfigError(ValueError):
    """Inconsistent model configuration."""


@dataclass(frozen=True)
class ModelConfig:
    layers: int
    embed_dim: int      # D
    heads: int          # h
    channels: int       # C
    time_steps: int     # frames per input
    map_height: int = 16
    map_width: int = 16
    patch: int = 4
    variant: str = "tstf"
    # post_norm: residual around each attention submodule, one LN closing the
    # block. pre_norm: LN before each submodule plus a final LN feeding the head.
    block_form: str = "post_norm"

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ConfigError(
                f"embed_dim {self.embed_dim} not divisible by heads {self.heads}"
            )
        if self.embed_dim % self.channels != 0:
            raise ConfigError(
                f"embed_dim {self.embed_dim} not divisible by channels {self.channels}"
            )
        if self.map_height % self.patch or self.map_width % self.patch:
            raise ConfigError(
                f"map {self.map_height}x{self.map_width} not divisible by patch {self.patch}"
            )
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.block_form not in BLOCK_FORMS:
            raise ConfigError(
                f"block_form must be one of {BLOCK_FORMS}, got {self.block_form!r}"
            )
        if min(self.layers, self.embed_dim, self.heads, self.channels, self.time_steps) < 1:
            raise ConfigError("all dimensions must be positive")

    @property
    def patches_per_frame(self) -> int:  # N
        return (self.map_height // self.patch) * (self.map_width // self.patch)

    @property
    def seq_len(self) -> int:  # T*N + 1 for the summary token
        return self.time_steps * self.patches_per_frame + 1

    @property
    def head_dim(self) -> int:  # d_h
        return self.embed_dim // self.heads

    @property
    def channel_dim(self) -> int:  # d'
        return self.embed_dim // self.channels

    @property
    def patch_values(self) -> int:  # C * patch^2 raw values per patch
        return self.channels * self.patch * self.patch

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(asdict(self), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ModelConfig":
        return cls(**json.loads(Path(path).read_text()))


# Full-scale presets mirror the published training setups; only the desk
# preset is meant to be trained here.
PRESETS: dict[str, ModelConfig] = {
    "desk": ModelConfig(layers=2, embed_dim=20, heads=5, channels=5, time_steps=8),
    "desk-4": ModelConfig(layers=4, embed_dim=20, heads=5, channels=5, time_steps=8),
    "tstf-6": ModelConfig(layers=6, embed_dim=155, heads=5, channels=5, time_steps=500),
    "tstf-8": ModelConfig(layers=8, embed_dim=155, heads=5, channels=5, time_steps=500),
    "timesformer-12": ModelConfig(
        layers=12, embed_dim=155, heads=5, channels=5, time_steps=500,
        variant="space_time_only",
    ),
}


def get_preset(name: str) -> ModelConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]
