"""Tri-axis attention win predictor: config, parameters, network."""

from .config import PRESETS, ConfigError, ModelConfig, get_preset
from .network import WinPredictor, extract_patches
from .params import (
    ParamCount,
    count_params,
    init_params,
    load_params,
    parameter_spec,
    save_params,
    zero_params,
)

__all__ = [
    "ConfigError",
    "ModelConfig",
    "PRESETS",
    "ParamCount",
    "WinPredictor",
    "count_params",
    "extract_patches",
    "get_preset",
    "init_params",
    "load_params",
    "parameter_spec",
    "save_params",
    "zero_params",
]
