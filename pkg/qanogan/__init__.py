"""Anomaly detection with quantum-generator WGAN-GP models."""
from .anogan import AnomalyScorer, CalibrationResult, ScoredSample, calibrate_threshold
from .config import ConfigLoader, RunConfig
from .enums import CircuitKind, GeneratorVariant, GradientMode
from .runner import ExperimentRunner

__version__ = "0.1.0"

__all__ = [
    'AnomalyScorer',
    'CalibrationResult',
    'CircuitKind',
    'ConfigLoader',
    'ExperimentRunner',
    'GeneratorVariant',
    'GradientMode',
    'RunConfig',
    'ScoredSample',
    'calibrate_threshold',
]
