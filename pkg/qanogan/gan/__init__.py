"""WGAN-GP with quantum or classical generators."""
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .generators import (
    ClassicalGenerator,
    QuantumGenerator,
    sample_latent,
)
from .losses import critic_loss, critic_loss_and_gradients, generator_loss, gradient_penalty
from .model import GanModel, build_critic, build_generator
from .trainer import HistoryRecord, Trainer, TrainingHistory

__all__ = [
    'Checkpoint',
    'ClassicalGenerator',
    'GanModel',
    'HistoryRecord',
    'QuantumGenerator',
    'Trainer',
    'TrainingHistory',
    'build_critic',
    'build_generator',
    'critic_loss',
    'critic_loss_and_gradients',
    'generator_loss',
    'gradient_penalty',
    'load_checkpoint',
    'sample_latent',
    'save_checkpoint',
]
