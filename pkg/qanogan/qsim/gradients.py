"""Jacobians of g_q with respect to circuit angles or latent angles.

Both methods evaluate all displaced circuits of a minibatch in one batched
simulation. `wrt="theta"` differentiates the trainable slots, `wrt="latent"`
the state-preparation angles z; every one of those angles enters through a
single Pauli rotation, so the parameter-shift rule is exact for both.
"""
from typing import Optional, Tuple

import numpy as np

from ..exceptions import InvalidArgumentError
from .ansatz import AnsatzLayout, BasisAssignment
from .state import circuit_expectations

DEFAULT_FD_STEP = 1e-4
SHIFT = np.pi / 2

WRT_THETA = "theta"
WRT_LATENT = "latent"


def _displacements(size: int, step: float, symmetric: bool) -> np.ndarray:
    eye = np.eye(size) * step
    if symmetric:
        return np.concatenate([eye, -eye], axis=0)
    return np.concatenate([np.zeros((1, size)), eye], axis=0)


def _evaluate_displaced(
    layout: AnsatzLayout,
    bases: BasisAssignment,
    theta: np.ndarray,
    zs: np.ndarray,
    displacements: np.ndarray,
    wrt: str,
    shots: Optional[int],
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    """Expectations for every (latent row, displacement) pair, shape (B, K, N)."""
    batch, n_disp = zs.shape[0], displacements.shape[0]
    if wrt == WRT_THETA:
        thetas = np.tile(theta[None, :] + displacements, (batch, 1))
        latents = np.repeat(zs, n_disp, axis=0)
    elif wrt == WRT_LATENT:
        thetas = theta[None, :]
        latents = (zs[:, None, :] + displacements[None, :, :]).reshape(-1, zs.shape[1])
    else:
        raise InvalidArgumentError(f"Unknown differentiation target: {wrt!r}")
    values = circuit_expectations(layout, bases, thetas, latents, shots=shots, rng=rng)
    return values.reshape(batch, n_disp, layout.n_qubits)


def _prepare(layout: AnsatzLayout, theta, zs) -> Tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
    if theta.size != layout.n_params:
        raise InvalidArgumentError(f"Expected {layout.n_params} circuit angles, got {theta.size}")
    if zs.shape[1] != layout.n_qubits:
        raise InvalidArgumentError(f"Expected {layout.n_qubits} latent angles, got {zs.shape[1]}")
    return theta, zs


def _width(layout: AnsatzLayout, wrt: str) -> int:
    return layout.n_params if wrt == WRT_THETA else layout.n_qubits


def jacobian_forward_diff(
    layout: AnsatzLayout,
    bases: BasisAssignment,
    theta,
    zs,
    h: float = DEFAULT_FD_STEP,
    wrt: str = WRT_THETA,
) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic g_q and its forward-difference Jacobian for a latent batch.

    Returns (values (B, N), jacobian (B, N, K)) with K the number of
    differentiated angles.
    """
    if h <= 0:
        raise InvalidArgumentError(f"Finite-difference step must be > 0, got {h}")
    theta, zs = _prepare(layout, theta, zs)
    values = _evaluate_displaced(
        layout, bases, theta, zs, _displacements(_width(layout, wrt), h, symmetric=False),
        wrt, None, None,
    )
    jacobian = (values[:, 1:, :] - values[:, :1, :]) / h
    return values[:, 0, :], np.transpose(jacobian, (0, 2, 1))


def jacobian_param_shift(
    layout: AnsatzLayout,
    bases: BasisAssignment,
    theta,
    zs,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    wrt: str = WRT_THETA,
) -> np.ndarray:
    """[g_q(a + pi/2 e_m) - g_q(a - pi/2 e_m)] / 2 for every angle a_m, shape (B, N, K).

    With `shots`, each shifted circuit is estimated from its own fresh sample.
    """
    theta, zs = _prepare(layout, theta, zs)
    width = _width(layout, wrt)
    values = _evaluate_displaced(
        layout, bases, theta, zs, _displacements(width, SHIFT, symmetric=True), wrt, shots, rng
    )
    jacobian = (values[:, :width, :] - values[:, width:, :]) / 2.0
    return np.transpose(jacobian, (0, 2, 1))


def grad_g_q_forward_diff(
    layout: AnsatzLayout, bases: BasisAssignment, theta, z, h: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """N x n_params forward-difference Jacobian of g_q at a single latent vector."""
    _, jacobian = jacobian_forward_diff(layout, bases, theta, np.atleast_2d(z), h=h)
    return jacobian[0]


def grad_g_q_param_shift(
    layout: AnsatzLayout,
    bases: BasisAssignment,
    theta,
    z,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """N x n_params parameter-shift Jacobian of g_q at a single latent vector."""
    return jacobian_param_shift(layout, bases, theta, np.atleast_2d(z), shots=shots, rng=rng)[0]
