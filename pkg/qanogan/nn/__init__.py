"""Dense networks, manual backpropagation and Adam."""
from .adam import AdamState, adam_step
from .checkpoint import load_network, save_network
from .dense import (
    DenseLayer,
    DenseNetwork,
    ForwardCache,
    backward,
    forward,
    glorot_uniform_init,
    input_gradient_param_grads,
)

__all__ = [
    'AdamState',
    'DenseLayer',
    'DenseNetwork',
    'ForwardCache',
    'adam_step',
    'backward',
    'forward',
    'glorot_uniform_init',
    'input_gradient_param_grads',
    'load_network',
    'save_network',
]
