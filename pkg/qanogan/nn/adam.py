"""Adam with bias correction over a flat parameter vector."""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from ..exceptions import InvalidArgumentError

DEFAULT_LEARNING_RATE = 0.0002
DEFAULT_BETA1 = 0.5
DEFAULT_BETA2 = 0.999
DEFAULT_EPSILON = 1e-7


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    epsilon: float = DEFAULT_EPSILON

    @classmethod
    def create(
        cls,
        size: int,
        learning_rate: float = DEFAULT_LEARNING_RATE,
        beta1: float = DEFAULT_BETA1,
        beta2: float = DEFAULT_BETA2,
        epsilon: float = DEFAULT_EPSILON,
    ) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0, learning_rate, beta1, beta2, epsilon)

    @property
    def size(self) -> int:
        return int(self.m.size)


def adam_step(state: AdamState, params, grads) -> Tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns new parameters and state."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.size != state.size:
        raise InvalidArgumentError(
            f"Adam size mismatch: params {params.shape}, grads {grads.shape}, state {state.size}"
        )
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    updated = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return updated, replace(state, m=m, v=v, t=t)
