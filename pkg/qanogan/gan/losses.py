"""Wasserstein critic and generator losses with the gradient penalty."""
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError
from ..nn import DenseNetwork, backward, forward, input_gradient_param_grads


@dataclass(frozen=True)
class CriticLossResult:
    loss: float
    penalty: float
    wasserstein: float
    gradients: np.ndarray


def _paired_batches(x_real, x_gen):
    x_real = np.atleast_2d(np.asarray(x_real, dtype=np.float64))
    x_gen = np.atleast_2d(np.asarray(x_gen, dtype=np.float64))
    if x_real.shape != x_gen.shape:
        raise InvalidArgumentError(
            f"Real and generated batches differ in shape: {x_real.shape} vs {x_gen.shape}"
        )
    if x_real.shape[0] == 0:
        raise InvalidArgumentError("Loss needs a non-empty batch")
    return x_real, x_gen


def interpolate(x_real: np.ndarray, x_gen: np.ndarray, eps) -> np.ndarray:
    """x_hat = x + eps (x_g - x), one eps per row."""
    eps = np.asarray(eps, dtype=np.float64).reshape(-1, 1)
    return x_real + eps * (x_gen - x_real)


def _input_gradients(critic: DenseNetwork, x_hat: np.ndarray):
    _, cache = forward(critic, x_hat)
    _, grads = backward(critic, cache, np.ones((x_hat.shape[0], 1)))
    return grads, cache


def gradient_penalty(critic: DenseNetwork, x_real, x_gen, eps) -> float:
    """Mean over rows of (||grad_x D(x_hat)||_2 - 1)^2."""
    x_real, x_gen = _paired_batches(x_real, x_gen)
    grads, _ = _input_gradients(critic, interpolate(x_real, x_gen, eps))
    norms = np.linalg.norm(grads, axis=1)
    return float(np.mean((norms - 1.0) ** 2))


def critic_loss_and_gradients(
    critic: DenseNetwork, x_real, x_gen, eps, penalty_weight: float
) -> CriticLossResult:
    """Loss mean(D(x_g) - D(x) + lambda * penalty) and its exact gradient w.r.t. the critic."""
    x_real, x_gen = _paired_batches(x_real, x_gen)
    m = x_real.shape[0]

    d_real, cache_real = forward(critic, x_real)
    d_gen, cache_gen = forward(critic, x_gen)
    grad_real, _ = backward(critic, cache_real, np.full((m, 1), -1.0 / m))
    grad_gen, _ = backward(critic, cache_gen, np.full((m, 1), 1.0 / m))
    wasserstein = float(np.mean(d_real) - np.mean(d_gen))

    gradients = grad_real + grad_gen
    penalty = 0.0
    if penalty_weight > 0:
        input_grads, cache_hat = _input_gradients(critic, interpolate(x_real, x_gen, eps))
        norms = np.linalg.norm(input_grads, axis=1)
        penalty = float(np.mean((norms - 1.0) ** 2))
        safe = np.where(norms > 0, norms, 1.0)
        # d(||g|| - 1)^2 / dg; zero where the gradient vanishes
        directions = np.where(
            norms[:, None] > 0,
            2.0 * (norms - 1.0)[:, None] * input_grads / safe[:, None],
            0.0,
        )
        gradients = gradients + input_gradient_param_grads(
            critic, cache_hat, directions * (penalty_weight / m)
        )

    loss = -wasserstein + penalty_weight * penalty
    return CriticLossResult(loss, penalty, wasserstein, gradients)


def critic_loss(critic: DenseNetwork, x_real, x_gen, eps, penalty_weight: float) -> float:
    x_real, x_gen = _paired_batches(x_real, x_gen)
    wasserstein = float(np.mean(critic(x_real)) - np.mean(critic(x_gen)))
    penalty = gradient_penalty(critic, x_real, x_gen, eps) if penalty_weight > 0 else 0.0
    return -wasserstein + penalty_weight * penalty


def generator_loss(critic: DenseNetwork, x_gen) -> float:
    """-mean D(x_g)."""
    x_gen = np.atleast_2d(np.asarray(x_gen, dtype=np.float64))
    if x_gen.shape[0] == 0:
        raise InvalidArgumentError("Loss needs a non-empty batch")
    return -float(np.mean(critic(x_gen)))
