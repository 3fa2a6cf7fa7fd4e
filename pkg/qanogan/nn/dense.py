"""Dense networks with hand-written forward and reverse passes.

Inputs may be a single vector (in_dim,) or a batch (batch, in_dim);
outputs and input gradients keep the caller's shape. Parameter gradients
are summed over the batch and returned flat, in the order of
`DenseNetwork.flat_parameters()`: each layer's weights row-major, then its
bias.
"""
import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..enums import Activation
from ..exceptions import ContractViolationError, InvalidArgumentError

LEAKY_SLOPE = 0.2
PIECEWISE_LINEAR = (Activation.IDENTITY, Activation.LEAKY_RELU)

_network_ids = itertools.count()


def activate(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind == Activation.LEAKY_RELU:
        return np.where(z >= 0, z, LEAKY_SLOPE * z)
    if kind == Activation.SIGMOID:
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return z


def activation_slope(kind: Activation, z: np.ndarray) -> np.ndarray:
    """Local derivative; leaky ReLU takes the positive branch at exactly 0."""
    if kind == Activation.LEAKY_RELU:
        return np.where(z >= 0, 1.0, LEAKY_SLOPE)
    if kind == Activation.SIGMOID:
        s = activate(kind, z)
        return s * (1.0 - s)
    return np.ones_like(z)


def glorot_uniform_init(shape: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Weights of shape (out_dim, in_dim) uniform in +-sqrt(6 / (in_dim + out_dim))."""
    out_dim, in_dim = shape
    if out_dim < 1 or in_dim < 1:
        raise InvalidArgumentError(f"Layer dimensions must be positive, got {shape}")
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


@dataclass
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64, ndmin=2)
        self.bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if self.bias.size != self.weights.shape[0]:
            raise InvalidArgumentError(
                f"Bias of length {self.bias.size} for {self.weights.shape[0]} outputs"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise InvalidArgumentError("Layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return int(self.weights.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_params(self) -> int:
        return self.weights.size + self.bias.size


class DenseNetwork:
    """Ordered affine layers, each followed by its activation."""

    def __init__(self, layers: Sequence[DenseLayer]):
        if not layers:
            raise InvalidArgumentError("A network needs at least one layer")
        for k, (left, right) in enumerate(zip(layers, layers[1:])):
            if left.out_dim != right.in_dim:
                raise InvalidArgumentError(
                    f"Layer {k} outputs {left.out_dim} values, layer {k + 1} expects {right.in_dim}"
                )
        self.layers: List[DenseLayer] = list(layers)
        self.uid = next(_network_ids)
        self.version = 0

    @classmethod
    def build(
        cls,
        dims: Sequence[int],
        activations: Sequence[Activation],
        rng: np.random.Generator,
    ) -> "DenseNetwork":
        """Glorot-uniform weights and zero biases for layer widths `dims`."""
        if len(dims) < 2 or len(activations) != len(dims) - 1:
            raise InvalidArgumentError(
                f"Need one activation per layer: dims={list(dims)}, activations={len(activations)}"
            )
        layers = [
            DenseLayer(glorot_uniform_init((out_dim, in_dim), rng), np.zeros(out_dim), activation)
            for in_dim, out_dim, activation in zip(dims[:-1], dims[1:], activations)
        ]
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> List[int]:
        return [self.in_dim] + [layer.out_dim for layer in self.layers]

    @property
    def activations(self) -> List[Activation]:
        return [layer.activation for layer in self.layers]

    @property
    def n_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    def is_piecewise_linear(self) -> bool:
        return all(layer.activation in PIECEWISE_LINEAR for layer in self.layers)

    def flat_parameters(self) -> np.ndarray:
        parts = []
        for layer in self.layers:
            parts.append(layer.weights.ravel())
            parts.append(layer.bias)
        return np.concatenate(parts)

    def set_flat_parameters(self, params: np.ndarray) -> None:
        params = np.asarray(params, dtype=np.float64).reshape(-1)
        if params.size != self.n_params:
            raise InvalidArgumentError(f"Expected {self.n_params} parameters, got {params.size}")
        offset = 0
        for layer in self.layers:
            size = layer.weights.size
            layer.weights = params[offset:offset + size].reshape(layer.weights.shape).copy()
            offset += size
            layer.bias = params[offset:offset + layer.out_dim].copy()
            offset += layer.out_dim
        self.version += 1

    def copy(self) -> "DenseNetwork":
        return DenseNetwork([
            DenseLayer(layer.weights.copy(), layer.bias.copy(), layer.activation)
            for layer in self.layers
        ])

    def __call__(self, x) -> np.ndarray:
        return forward(self, x)[0]

    def __repr__(self) -> str:
        acts = ",".join(a.name for a in self.activations)
        return f"DenseNetwork(dims={self.dims}, activations=[{acts}])"


@dataclass
class ForwardCache:
    """Everything backward needs from one forward call."""
    network_uid: int
    network_version: int
    single: bool
    inputs: List[np.ndarray] = field(default_factory=list)
    preactivations: List[np.ndarray] = field(default_factory=list)

    def slopes(self, net: DenseNetwork) -> List[np.ndarray]:
        return [
            activation_slope(layer.activation, z)
            for layer, z in zip(net.layers, self.preactivations)
        ]


def _as_batch(net: DenseNetwork, x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise InvalidArgumentError(
            f"Network expects inputs of dimension {net.in_dim}, got shape {x.shape}"
        )
    return x, single


def _check_cache(net: DenseNetwork, cache: ForwardCache) -> None:
    if cache.network_uid != net.uid or cache.network_version != net.version:
        raise ContractViolationError(
            "Forward cache does not belong to the current parameters of this network"
        )


def forward(net: DenseNetwork, x) -> Tuple[np.ndarray, ForwardCache]:
    a, single = _as_batch(net, x)
    cache = ForwardCache(net.uid, net.version, single)
    for layer in net.layers:
        cache.inputs.append(a)
        z = a @ layer.weights.T + layer.bias
        cache.preactivations.append(z)
        a = activate(layer.activation, z)
    return (a[0] if single else a), cache


def backward(
    net: DenseNetwork, cache: ForwardCache, upstream
) -> Tuple[np.ndarray, np.ndarray]:
    """Reverse pass: (flat parameter gradient, input gradient)."""
    _check_cache(net, cache)
    grad = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
    expected = (cache.inputs[0].shape[0], net.out_dim)
    if grad.shape != expected:
        raise InvalidArgumentError(f"Upstream gradient has shape {grad.shape}, expected {expected}")
    parts: List[np.ndarray] = []
    layers = zip(net.layers, cache.inputs, cache.preactivations)
    for layer, a_in, z in reversed(list(layers)):
        delta = grad * activation_slope(layer.activation, z)
        parts.append(delta.sum(axis=0))
        parts.append((delta.T @ a_in).ravel())
        grad = delta @ layer.weights
    param_grads = np.concatenate(parts[::-1])
    return param_grads, (grad[0] if cache.single else grad)


def input_gradient_param_grads(
    net: DenseNetwork, cache: ForwardCache, directions: np.ndarray
) -> np.ndarray:
    """Parameter gradient of sum_b <grad_x D(x_b), u_b> with u held fixed.

    This is the second-order term the gradient penalty needs. For identity
    and leaky-ReLU layers the activation slopes are locally constant, so the
    input gradient is a product of weight matrices and this is exact; bias
    entries are zero.
    """
    _check_cache(net, cache)
    if net.out_dim != 1:
        raise InvalidArgumentError("Input-gradient terms need a scalar-output network")
    if not net.is_piecewise_linear():
        raise InvalidArgumentError(
            "Input-gradient parameter terms are only exact for identity/leaky-ReLU layers"
        )
    u = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    batch = cache.inputs[0].shape[0]
    if u.shape != (batch, net.in_dim):
        raise InvalidArgumentError(f"Directions have shape {u.shape}, need {(batch, net.in_dim)}")

    slopes = cache.slopes(net)
    left: List[Optional[np.ndarray]] = [None] * len(net.layers)
    r = np.ones((batch, 1))
    for k in reversed(range(len(net.layers))):
        r = r * slopes[k]
        left[k] = r
        r = r @ net.layers[k].weights

    parts: List[np.ndarray] = []
    q = u
    for k, layer in enumerate(net.layers):
        parts.append((left[k].T @ q).ravel())
        parts.append(np.zeros(layer.out_dim))
        q = slopes[k] * (q @ layer.weights.T)
    return np.concatenate(parts)
