"""Configuration package for qanogan."""
from .base import (
    AnomalyConfig,
    AnsatzConfig,
    CriticConfig,
    DataConfig,
    GeneratorConfig,
    RunConfig,
    SplitSpec,
    SynthConfig,
    TrainConfig,
)
from .loader import ConfigLoader, apply_overrides, config_from_dict, config_to_dict

__all__ = [
    'AnomalyConfig',
    'AnsatzConfig',
    'ConfigLoader',
    'CriticConfig',
    'DataConfig',
    'GeneratorConfig',
    'RunConfig',
    'SplitSpec',
    'SynthConfig',
    'TrainConfig',
    'apply_overrides',
    'config_from_dict',
    'config_to_dict',
]
