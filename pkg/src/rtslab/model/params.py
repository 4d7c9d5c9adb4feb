"""Parameter construction, counting, and checkpoint round-trips.

Naming scheme (all keys in one flat dict):

    embed.weight (D, C*patch^2)   embed.bias (D,)
    pos (T*N+1, D)                cls (D,)
    layers.{l}.{sa|ta}.{wq,wk,wv,wo} (D, D) and .{bq,bk,bv,bo} (D,)
    layers.{l}.fa.{wq,wk,wv,wo} (d', d') and biases (d',)
    layers.{l}.cls_attn.*  single-head cross-attention, (D, D) / (D,)
    layers.{l}.cls_norm.{gamma,beta} (D,)
    post_norm: layers.{l}.norm.{gamma,beta} (D,)
    pre_norm:  layers.{l}.norm_{sa,ta,fa}.{gamma,beta} (D,) + final_norm.{gamma,beta}
    head.w1 (D, 4D)  head.b1 (4D,)  head.w2 (4D, 1)  head.b2 ()

Weight matrices multiply row-vector activations on the right (out = x @ W + b).
Init: weights ~ Normal(0, 1/sqrt(fan_in)); biases 0; pos and cls ~
Normal(0, 0.02); norm gains 1, shifts 0. Parameters are created in a fixed
order from one SplitMix64 stream, so a seed pins every value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..checkpoint import load_checkpoint, save_checkpoint
from ..rng import SplitMix64
from ..tensor import Tensor, normal
from .config import ConfigError, ModelConfig

ATTN_SCOPES = ("sa", "ta", "fa")


def _attention_names(prefix: str, dim: int) -> list[tuple[str, tuple[int, ...], str]]:
    """(name, shape, init-kind) for one attention submodule of width `dim`."""
    out = []
    for part in ("wq", "wk", "wv", "wo"):
        out.append((f"{prefix}.{part}", (dim, dim), "weight"))
    for part in ("bq", "bk", "bv", "bo"):
        out.append((f"{prefix}.{part}", (dim,), "zero"))
    return out


def parameter_spec(config: ModelConfig) -> list[tuple[str, tuple[int, ...], str]]:
    """Every parameter's (name, shape, init-kind), in creation order."""
    d = config.embed_dim
    spec: list[tuple[str, tuple[int, ...], str]] = [
        ("embed.weight", (d, config.patch_values), "weight"),
        ("embed.bias", (d,), "zero"),
        ("pos", (config.seq_len, d), "embedding"),
        ("cls", (d,), "embedding"),
    ]
    for l in range(config.layers):
        base = f"layers.{l}"
        spec += _attention_names(f"{base}.sa", d)
        spec += _attention_names(f"{base}.ta", d)
        spec += _attention_names(f"{base}.fa", config.channel_dim)
        spec += _attention_names(f"{base}.cls_attn", d)
        spec += [
            (f"{base}.cls_norm.gamma", (d,), "one"),
            (f"{base}.cls_norm.beta", (d,), "zero"),
        ]
        if config.block_form == "post_norm":
            spec += [
                (f"{base}.norm.gamma", (d,), "one"),
                (f"{base}.norm.beta", (d,), "zero"),
            ]
        else:
            for scope in ("sa", "ta", "fa"):
                spec += [
                    (f"{base}.norm_{scope}.gamma", (d,), "one"),
                    (f"{base}.norm_{scope}.beta", (d,), "zero"),
                ]
    if config.block_form == "pre_norm":
        spec += [("final_norm.gamma", (d,), "one"), ("final_norm.beta", (d,), "zero")]
    spec += [
        ("head.w1", (d, 4 * d), "weight"),
        ("head.b1", (4 * d,), "zero"),
        ("head.w2", (4 * d, 1), "weight"),
        ("head.b2", (), "zero"),
    ]
    return spec


def _fan_in(name: str, shape: tuple[int, ...]) -> int:
    # embed.weight is stored (D, C*p^2) but contracts over its second axis
    if name == "embed.weight":
        return shape[1]
    return shape[0]


def init_params(config: ModelConfig, seed: int) -> dict[str, Tensor]:
    rng = SplitMix64(seed)
    params: dict[str, Tensor] = {}
    for name, shape, kind in parameter_spec(config):
        if kind == "weight":
            std = 1.0 / np.sqrt(_fan_in(name, shape))
            params[name] = normal(rng, shape, std=std, requires_grad=True)
        elif kind == "embedding":
            params[name] = normal(rng, shape, std=0.02, requires_grad=True)
        elif kind == "one":
            params[name] = Tensor(np.ones(shape), requires_grad=True)
        else:
            params[name] = Tensor(np.zeros(shape), requires_grad=True)
    return params


def zero_params(config: ModelConfig) -> dict[str, Tensor]:
    """All-zero allocation; for shape/accounting work, not for training."""
    return {
        name: Tensor(np.zeros(shape), requires_grad=True)
        for name, shape, _ in parameter_spec(config)
    }


def _group_of(name: str) -> str:
    if name.startswith("embed."):
        return "embedding"
    if name == "pos":
        return "positional"
    if name == "cls":
        return "cls_token"
    if name.startswith("head."):
        return "head"
    if name == "final_norm.gamma" or name == "final_norm.beta":
        return "norms"
    # layers.{l}.<scope>...
    scope = name.split(".")[2]
    if scope == "sa":
        return "spatial"
    if scope == "ta":
        return "temporal"
    if scope == "fa":
        return "feature"
    if scope in ("cls_attn", "cls_norm"):
        return "cls_route"
    return "norms"


GROUP_ORDER = (
    "embedding",
    "positional",
    "cls_token",
    "spatial",
    "temporal",
    "feature",
    "cls_route",
    "norms",
    "head",
)

# groups a space/time-only model never touches
_INACTIVE_BY_VARIANT = {"tstf": (), "space_time_only": ("feature",)}


@dataclass(frozen=True)
class ParamCount:
    """Shape-algebra census of a configuration's parameters."""

    groups: dict[str, int]
    per_layer: dict[str, int]
    total_allocated: int
    total_active: int

    def breakdown(self) -> str:
        lines = [f"{g:>12}: {self.groups.get(g, 0):>12,}" for g in GROUP_ORDER]
        lines.append(f"{'allocated':>12}: {self.total_allocated:>12,}")
        lines.append(f"{'active':>12}: {self.total_active:>12,}")
        return "\n".join(lines)


def count_params(config: ModelConfig) -> ParamCount:
    """Exact parameter counts with a per-group breakdown.

    `total_active` excludes groups the variant never uses (the feature
    scope for space/time-only models); `total_allocated` counts every
    array the parameter dict holds.
    """
    groups: dict[str, int] = {g: 0 for g in GROUP_ORDER}
    per_layer: dict[str, int] = {g: 0 for g in GROUP_ORDER}
    for name, shape, _ in parameter_spec(config):
        n = int(np.prod(shape)) if shape else 1
        g = _group_of(name)
        groups[g] += n
        if name.startswith("layers.0."):
            per_layer[g] += n
    inactive = _INACTIVE_BY_VARIANT[config.variant]
    total_allocated = sum(groups.values())
    total_active = sum(n for g, n in groups.items() if g not in inactive)
    if config.block_form == "pre_norm" and "feature" in inactive:
        # the unused fa pre-norm is still counted under norms; subtract it
        total_active -= 2 * config.embed_dim * config.layers
    return ParamCount(
        groups=groups,
        per_layer=per_layer,
        total_allocated=total_allocated,
        total_active=total_active,
    )


def accounting_report() -> str:
    """Markdown census of every preset vs the published full-scale counts."""
    from .config import PRESETS
    from ..train.published import REFERENCE_PARAM_COUNTS

    lines = [
        "# Parameter accounting",
        "",
        "Exact counts from shape algebra, per group and preset. `active` excludes",
        "groups a variant never touches (the feature scope for space/time-only",
        "models). Published totals use an unknown counting basis, so deltas are",
        "reported, not forced to zero.",
        "",
    ]
    for name in ("desk", "tstf-6", "tstf-8", "timesformer-12"):
        cfg = PRESETS[name]
        counts = count_params(cfg)
        lines.append(f"## {name}")
        lines.append("")
        lines.append("| group | parameters | per layer |")
        lines.append("|---|---:|---:|")
        for group in GROUP_ORDER:
            per = counts.per_layer.get(group, 0)
            per_str = f"{per:,}" if per else ""
            lines.append(f"| {group} | {counts.groups.get(group, 0):,} | {per_str} |")
        lines.append(f"| **allocated** | **{counts.total_allocated:,}** | |")
        lines.append(f"| **active** | **{counts.total_active:,}** | |")
        lines.append("")
        published = REFERENCE_PARAM_COUNTS.get(name)
        if published is not None:
            delta = counts.total_active - published
            pct = 100.0 * delta / published
            lines.append(
                f"Published total: {published:,}. Delta (active - published): "
                f"{delta:+,} ({pct:+.1f}%)."
            )
            lines.append("")
    return "\n".join(lines) + "\n"


def save_params(path, config: ModelConfig, params: dict[str, Tensor]) -> None:
    save_checkpoint(path, params)


def load_params(path, config: ModelConfig) -> dict[str, Tensor]:
    """Load a checkpoint, validating every shape against the config."""
    arrays = load_checkpoint(path)
    expected = {name: shape for name, shape, _ in parameter_spec(config)}
    if set(arrays) != set(expected):
        missing = sorted(set(expected) - set(arrays))
        extra = sorted(set(arrays) - set(expected))
        raise ConfigError(
            f"checkpoint does not match config: missing={missing[:4]} extra={extra[:4]}"
        )
    out: dict[str, Tensor] = {}
    for name, arr in arrays.items():
        if tuple(arr.shape) != tuple(expected[name]):
            raise ConfigError(
                f"checkpoint shape mismatch for {name}: "
                f"file {tuple(arr.shape)} vs config {tuple(expected[name])}"
            )
        out[name] = Tensor(arr, requires_grad=True)
    return out
