"""Quantum and classical generators with a shared forward/backward protocol.

`forward` returns a pass object holding the generated samples; calling
`backward` on it with dL/dx_g yields the parameter gradients per group and,
when the pass was built for the latent target, dL/dz.
"""
from typing import Dict, Optional, Tuple

import numpy as np

from ..enums import GeneratorVariant, GradientMode, GradientTarget
from ..exceptions import InvalidArgumentError
from ..nn import DenseNetwork, ForwardCache, backward, forward
from ..qsim import AnsatzLayout, BasisAssignment, circuit_expectations
from ..qsim.gradients import (
    DEFAULT_FD_STEP,
    WRT_LATENT,
    WRT_THETA,
    jacobian_forward_diff,
    jacobian_param_shift,
)

THETA = "theta"
BODY = "body"
UPSCALING = "upscaling"

Gradients = Dict[str, np.ndarray]


def sample_latent(
    variant: GeneratorVariant, latent_dim: int, m: int, rng: np.random.Generator
) -> np.ndarray:
    """m latent vectors: U(-pi, pi) angles for QUANTUM, U(0, 1) for CLASSICAL."""
    if m < 1:
        raise InvalidArgumentError(f"Latent batch size must be >= 1, got {m}")
    if variant == GeneratorVariant.QUANTUM:
        return rng.uniform(-np.pi, np.pi, size=(m, latent_dim))
    return rng.uniform(0.0, 1.0, size=(m, latent_dim))


def _as_latent_batch(zs, latent_dim: int) -> np.ndarray:
    zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
    if zs.ndim != 2 or zs.shape[1] != latent_dim:
        raise InvalidArgumentError(
            f"Generator expects latent vectors of length {latent_dim}, got shape {zs.shape}"
        )
    return zs


class QuantumPass:
    """One batched evaluation of W(g_q(z)) and, optionally, its g_q Jacobian."""

    def __init__(
        self,
        outputs: np.ndarray,
        jacobian: Optional[np.ndarray],
        target: Optional[GradientTarget],
        upscaling: Optional[DenseNetwork],
        cache: Optional[ForwardCache],
        feature_scale: float,
    ):
        self.outputs = outputs
        self.jacobian = jacobian
        self.target = target
        self._upscaling = upscaling
        self._cache = cache
        self._feature_scale = feature_scale

    def backward(self, upstream) -> Tuple[Gradients, Optional[np.ndarray]]:
        if self.jacobian is None:
            raise InvalidArgumentError("Generator pass was evaluated without a gradient target")
        upstream = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        grads: Gradients = {}
        if self._upscaling is not None:
            grads[UPSCALING], beta = backward(self._upscaling, self._cache, upstream)
        else:
            beta = upstream
        beta = beta * self._feature_scale
        projected = np.einsum("bn,bnk->bk", beta, self.jacobian)
        if self.target == GradientTarget.PARAMETERS:
            grads[THETA] = projected.sum(axis=0)
            return grads, None
        return grads, projected


class ClassicalPass:
    """One batched evaluation of W(g_c(z)); backpropagation covers every target."""

    def __init__(
        self,
        outputs: np.ndarray,
        body: Optional[DenseNetwork],
        body_cache: Optional[ForwardCache],
        upscaling: Optional[DenseNetwork],
        upscaling_cache: Optional[ForwardCache],
    ):
        self.outputs = outputs
        self._body = body
        self._body_cache = body_cache
        self._upscaling = upscaling
        self._upscaling_cache = upscaling_cache

    def backward(self, upstream) -> Tuple[Gradients, np.ndarray]:
        grad = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        grads: Gradients = {}
        if self._upscaling is not None:
            grads[UPSCALING], grad = backward(self._upscaling, self._upscaling_cache, grad)
        if self._body is not None:
            grads[BODY], grad = backward(self._body, self._body_cache, grad)
        return grads, grad


class QuantumGenerator:
    """x_g = W(g_q(z; theta, bases); phi), or g_q alone without upscaling."""

    variant = GeneratorVariant.QUANTUM

    def __init__(
        self,
        layout: AnsatzLayout,
        bases: BasisAssignment,
        theta: np.ndarray,
        upscaling: Optional[DenseNetwork] = None,
        rescale_expectations: bool = False,
    ):
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != layout.n_params:
            raise InvalidArgumentError(
                f"Expected {layout.n_params} circuit parameters, got {theta.size}"
            )
        if len(bases) != layout.n_params:
            raise InvalidArgumentError(
                f"Basis assignment has {len(bases)} axes for {layout.n_params} slots"
            )
        if upscaling is not None and upscaling.in_dim != layout.n_qubits:
            raise InvalidArgumentError(
                f"Upscaling layer expects {upscaling.in_dim} inputs, circuit has {layout.n_qubits}"
            )
        self.layout = layout
        self.bases = bases
        self.theta = theta
        self.upscaling = upscaling
        self.rescale_expectations = rescale_expectations

    @property
    def latent_dim(self) -> int:
        return self.layout.n_qubits

    @property
    def data_dim(self) -> int:
        return self.upscaling.out_dim if self.upscaling is not None else self.layout.n_qubits

    def parameters(self) -> Dict[str, np.ndarray]:
        groups = {THETA: self.theta.copy()}
        if self.upscaling is not None:
            groups[UPSCALING] = self.upscaling.flat_parameters()
        return groups

    def set_parameters(self, group: str, values: np.ndarray) -> None:
        if group == THETA:
            values = np.asarray(values, dtype=np.float64).reshape(-1)
            if values.size != self.layout.n_params:
                raise InvalidArgumentError(
                    f"Expected {self.layout.n_params} circuit parameters, got {values.size}"
                )
            self.theta = values.copy()
        elif group == UPSCALING and self.upscaling is not None:
            self.upscaling.set_flat_parameters(values)
        else:
            raise InvalidArgumentError(f"Quantum generator has no parameter group {group!r}")

    def forward(
        self,
        zs,
        target: Optional[GradientTarget] = None,
        shots: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
        mode: GradientMode = GradientMode.FORWARD_DIFF,
        fd_step: float = DEFAULT_FD_STEP,
    ) -> QuantumPass:
        zs = _as_latent_batch(zs, self.latent_dim)
        jacobian = None
        wrt = WRT_THETA if target == GradientTarget.PARAMETERS else WRT_LATENT
        if target is not None and mode == GradientMode.FORWARD_DIFF:
            if shots is not None:
                raise InvalidArgumentError("Forward differences need analytic expectations")
            values, jacobian = jacobian_forward_diff(
                self.layout, self.bases, self.theta, zs, h=fd_step, wrt=wrt
            )
        else:
            values = circuit_expectations(
                self.layout, self.bases, self.theta, zs, shots=shots, rng=rng
            )
            if target is not None:
                jacobian = jacobian_param_shift(
                    self.layout, self.bases, self.theta, zs, shots=shots, rng=rng, wrt=wrt
                )

        scale = 0.5 if self.rescale_expectations else 1.0
        features = (1.0 + values) * 0.5 if self.rescale_expectations else values
        cache = None
        if self.upscaling is not None:
            outputs, cache = forward(self.upscaling, features)
        else:
            outputs = features
        return QuantumPass(outputs, jacobian, target, self.upscaling, cache, scale)

    def generate(
        self, zs, shots: Optional[int] = None, rng: Optional[np.random.Generator] = None
    ) -> np.ndarray:
        return self.forward(zs, shots=shots, rng=rng).outputs


class ClassicalGenerator:
    """x_g = W(g_c(z; theta_c); phi) with a leaky-ReLU body g_c."""

    variant = GeneratorVariant.CLASSICAL

    def __init__(
        self,
        latent_dim: int,
        body: Optional[DenseNetwork] = None,
        upscaling: Optional[DenseNetwork] = None,
    ):
        if body is not None and body.in_dim != latent_dim:
            raise InvalidArgumentError(
                f"Body expects {body.in_dim} inputs, latent dimension is {latent_dim}"
            )
        feature_dim = body.out_dim if body is not None else latent_dim
        if upscaling is not None and upscaling.in_dim != feature_dim:
            raise InvalidArgumentError(
                f"Upscaling layer expects {upscaling.in_dim} inputs, body produces {feature_dim}"
            )
        self._latent_dim = latent_dim
        self.body = body
        self.upscaling = upscaling

    @property
    def latent_dim(self) -> int:
        return self._latent_dim

    @property
    def data_dim(self) -> int:
        if self.upscaling is not None:
            return self.upscaling.out_dim
        return self.body.out_dim if self.body is not None else self._latent_dim

    def _networks(self) -> Dict[str, DenseNetwork]:
        nets = {}
        if self.body is not None:
            nets[BODY] = self.body
        if self.upscaling is not None:
            nets[UPSCALING] = self.upscaling
        return nets

    def parameters(self) -> Dict[str, np.ndarray]:
        return {name: net.flat_parameters() for name, net in self._networks().items()}

    def set_parameters(self, group: str, values: np.ndarray) -> None:
        nets = self._networks()
        if group not in nets:
            raise InvalidArgumentError(f"Classical generator has no parameter group {group!r}")
        nets[group].set_flat_parameters(values)

    def forward(
        self,
        zs,
        target: Optional[GradientTarget] = None,
        shots: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
        mode: GradientMode = GradientMode.FORWARD_DIFF,
        fd_step: float = DEFAULT_FD_STEP,
    ) -> ClassicalPass:
        a = _as_latent_batch(zs, self._latent_dim)
        body_cache = upscaling_cache = None
        if self.body is not None:
            a, body_cache = forward(self.body, a)
        if self.upscaling is not None:
            a, upscaling_cache = forward(self.upscaling, a)
        return ClassicalPass(a, self.body, body_cache, self.upscaling, upscaling_cache)

    def generate(
        self, zs, shots: Optional[int] = None, rng: Optional[np.random.Generator] = None
    ) -> np.ndarray:
        return self.forward(zs).outputs
