"""Dense statevector simulation of the latent encoding and the ansatz.

Qubit 0 is the most significant bit of the amplitude index. Every kernel
works on a batch of states, shape (batch, 2**n_qubits); the single-state
operations wrap a batch of one.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..enums import GateKind
from ..exceptions import InvalidArgumentError
from .ansatz import AXIS_TO_GATE, AnsatzLayout, BasisAssignment

NORM_TOLERANCE = 1e-10
MAX_QUBITS = 20


@dataclass(frozen=True)
class QubitState:
    """Unit-norm vector of 2**n_qubits complex amplitudes."""
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise InvalidArgumentError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if amplitudes.shape != (2 ** self.n_qubits,):
            raise InvalidArgumentError(
                f"Expected {2 ** self.n_qubits} amplitudes, got shape {amplitudes.shape}"
            )
        norm_sq = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise InvalidArgumentError(f"State is not normalized: squared norm {norm_sq}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def zero(cls, n_qubits: int) -> "QubitState":
        amplitudes = np.zeros(2 ** n_qubits, dtype=np.complex128)
        amplitudes[0] = 1.0
        return cls(n_qubits, amplitudes)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class ShotSample:
    """S measured bitstrings, shape (S, n_qubits), qubit 0 first."""
    bitstrings: np.ndarray

    @property
    def size(self) -> int:
        return int(self.bitstrings.shape[0])

    @classmethod
    def from_strings(cls, strings) -> "ShotSample":
        rows = [[int(bit) for bit in s] for s in strings]
        return cls(np.asarray(rows, dtype=np.uint8).reshape(len(rows), -1))


@lru_cache(maxsize=None)
def _z_signs(n_qubits: int) -> np.ndarray:
    """(2**n, n) matrix of (-1)**bit_i(x)."""
    index = np.arange(2 ** n_qubits)[:, None]
    shifts = (n_qubits - 1 - np.arange(n_qubits))[None, :]
    bits = (index >> shifts) & 1
    signs = (1 - 2 * bits).astype(np.float64)
    signs.setflags(write=False)
    return signs


@lru_cache(maxsize=None)
def _cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    index = np.arange(2 ** n_qubits)
    control_mask = 1 << (n_qubits - 1 - control)
    target_mask = 1 << (n_qubits - 1 - target)
    perm = np.where(index & control_mask, index ^ target_mask, index)
    perm.setflags(write=False)
    return perm


def rotation_matrices(kind: GateKind, angles: np.ndarray) -> np.ndarray:
    """Batch of 2x2 rotation matrices exp(-i angle P / 2), shape (batch, 2, 2)."""
    half = np.asarray(angles, dtype=np.float64) / 2.0
    c = np.cos(half)
    s = np.sin(half)
    out = np.zeros(half.shape + (2, 2), dtype=np.complex128)
    if kind == GateKind.RX:
        out[..., 0, 0] = c
        out[..., 0, 1] = -1j * s
        out[..., 1, 0] = -1j * s
        out[..., 1, 1] = c
    elif kind == GateKind.RY:
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
    elif kind == GateKind.RZ:
        out[..., 0, 0] = np.exp(-1j * half)
        out[..., 1, 1] = np.exp(1j * half)
    else:
        raise InvalidArgumentError(f"{kind.name} is not a rotation")
    return out


def _apply_single(amps: np.ndarray, n_qubits: int, qubit: int, matrices: np.ndarray) -> np.ndarray:
    batch = amps.shape[0]
    psi = amps.reshape(batch, 2 ** qubit, 2, 2 ** (n_qubits - qubit - 1))
    return np.einsum("bij,bajc->baic", matrices, psi).reshape(batch, -1)


def latent_amplitudes(zs: np.ndarray) -> np.ndarray:
    """S(z)|0...0> for a batch of angle vectors, shape (batch, 2**N)."""
    zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
    half = zs / 2.0
    factors = np.stack([np.cos(half), -1j * np.sin(half)], axis=-1)
    amps = np.ones((zs.shape[0], 1), dtype=np.complex128)
    for qubit in range(zs.shape[1]):
        amps = (amps[:, :, None] * factors[:, qubit, None, :]).reshape(zs.shape[0], -1)
    return amps


def evolve(
    amps: np.ndarray,
    layout: AnsatzLayout,
    bases: BasisAssignment,
    thetas: np.ndarray,
) -> np.ndarray:
    """Apply the layout's gates in order; `thetas` has one row per batch state."""
    thetas = np.broadcast_to(np.asarray(thetas, dtype=np.float64), (amps.shape[0], layout.n_params))
    n = layout.n_qubits
    for gate in layout.gates:
        if gate.kind == GateKind.CNOT:
            amps = amps[:, _cnot_permutation(n, gate.control, gate.target)]
            continue
        if gate.param_slot is not None:
            kind = AXIS_TO_GATE[bases.axes[gate.param_slot]]
            angles = thetas[:, gate.param_slot]
        else:
            kind = gate.kind
            angles = np.full(amps.shape[0], gate.fixed_angle)
        amps = _apply_single(amps, n, gate.target, rotation_matrices(kind, angles))
    return amps


def _check_circuit_args(layout: AnsatzLayout, bases: BasisAssignment, n_thetas: int) -> None:
    if n_thetas != layout.n_params:
        raise InvalidArgumentError(f"Expected {layout.n_params} circuit parameters, got {n_thetas}")
    if len(bases) != layout.n_params:
        raise InvalidArgumentError(
            f"Basis assignment has {len(bases)} axes for {layout.n_params} slots"
        )


def expectations_from_amplitudes(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    return (np.abs(amps) ** 2) @ _z_signs(n_qubits)


def sampled_expectations(
    amps: np.ndarray, n_qubits: int, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-row <Z_i> estimated from `shots` Born-rule draws.

    Draws are histogrammed with one multinomial per row, which has the same
    law as averaging S independent bitstrings.
    """
    if shots < 1:
        raise InvalidArgumentError(f"Sample size must be >= 1, got {shots}")
    probs = np.abs(amps) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    counts = rng.multinomial(shots, probs)
    return (counts @ _z_signs(n_qubits)) / shots


def circuit_expectations(
    layout: AnsatzLayout,
    bases: BasisAssignment,
    thetas: np.ndarray,
    zs: np.ndarray,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """g_q for a batch: row b is <Z> of U(thetas[b]) S(zs[b]) |0>.

    Analytic when `shots` is None, otherwise estimated from a fresh sample
    per row drawn from `rng`.
    """
    zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    if zs.shape[1] != layout.n_qubits:
        raise InvalidArgumentError(f"Expected {layout.n_qubits} latent angles, got {zs.shape[1]}")
    _check_circuit_args(layout, bases, thetas.shape[1])
    batch = max(zs.shape[0], thetas.shape[0])
    amps = latent_amplitudes(np.broadcast_to(zs, (batch, layout.n_qubits)))
    amps = evolve(amps, layout, bases, np.broadcast_to(thetas, (batch, layout.n_params)))
    if shots is None:
        return expectations_from_amplitudes(amps, layout.n_qubits)
    if rng is None:
        raise InvalidArgumentError("Sampled expectations need a random generator")
    return sampled_expectations(amps, layout.n_qubits, shots, rng)


def prepare_latent_state(z) -> QubitState:
    """S(z)|0...0> with R_x(z_i) on qubit i."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size < 1:
        raise InvalidArgumentError(f"Latent vector must be 1-D and non-empty, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InvalidArgumentError("Latent angles must be finite")
    return QubitState(z.size, latent_amplitudes(z)[0])


def apply_circuit(
    state: QubitState, layout: AnsatzLayout, bases: BasisAssignment, theta
) -> QubitState:
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    _check_circuit_args(layout, bases, theta.size)
    if state.n_qubits != layout.n_qubits:
        raise InvalidArgumentError(
            f"State has {state.n_qubits} qubits, layout expects {layout.n_qubits}"
        )
    amps = evolve(state.amplitudes[None, :].copy(), layout, bases, theta[None, :])
    return QubitState(layout.n_qubits, amps[0])


def expect_z_analytic(state: QubitState) -> np.ndarray:
    return expectations_from_amplitudes(state.amplitudes[None, :], state.n_qubits)[0]


def sample_bitstrings(state: QubitState, shots: int, rng: np.random.Generator) -> ShotSample:
    if shots < 1:
        raise InvalidArgumentError(f"Sample size must be >= 1, got {shots}")
    probs = state.probabilities()
    probs = probs / probs.sum()
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    shifts = state.n_qubits - 1 - np.arange(state.n_qubits)
    bits = ((outcomes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    return ShotSample(bits)


def expect_z_from_sample(sample: ShotSample) -> np.ndarray:
    """(#0 - #1) / S per qubit; one sample serves every qubit since the Z_i commute."""
    bits = np.asarray(sample.bitstrings)
    if bits.ndim != 2 or bits.shape[0] == 0:
        raise InvalidArgumentError("Cannot estimate expectations from an empty sample")
    return 1.0 - 2.0 * bits.mean(axis=0)
