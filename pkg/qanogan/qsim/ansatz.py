"""Circuit structure: gate lists, rotation bases and parameter initialization."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..enums import CircuitKind, GateKind, RngPurpose, RotationAxis
from ..exceptions import InvalidArgumentError
from ..rng import make_rng

logger = logging.getLogger(__name__)

AXIS_TO_GATE: Dict[RotationAxis, GateKind] = {
    RotationAxis.X: GateKind.RX,
    RotationAxis.Y: GateKind.RY,
    RotationAxis.Z: GateKind.RZ,
}

FULL_ROTATION_AXES = (RotationAxis.X, RotationAxis.Y, RotationAxis.Z)


@dataclass(frozen=True)
class GateOp:
    """One gate of a layout.

    Trainable rotations carry a `param_slot` into theta; their axis is taken
    from the BasisAssignment at application time. Non-trainable rotations
    carry a `fixed_angle` instead.
    """
    kind: GateKind
    target: int
    control: Optional[int] = None
    param_slot: Optional[int] = None
    fixed_angle: Optional[float] = None
    layer: int = 0

    def __post_init__(self):
        if self.kind == GateKind.CNOT:
            if self.control is None or self.control == self.target:
                raise InvalidArgumentError(
                    f"CNOT needs a control distinct from target {self.target}"
                )
            if self.param_slot is not None or self.fixed_angle is not None:
                raise InvalidArgumentError("CNOT takes no angle")
        else:
            if self.control is not None:
                raise InvalidArgumentError(f"{self.kind.name} takes no control qubit")
            if (self.param_slot is None) == (self.fixed_angle is None):
                raise InvalidArgumentError(
                    f"{self.kind.name} needs exactly one of param_slot/fixed_angle"
                )

    @property
    def trainable(self) -> bool:
        return self.param_slot is not None

    def qubits(self) -> Tuple[int, ...]:
        if self.control is None:
            return (self.target,)
        return (self.control, self.target)


@dataclass(frozen=True)
class BasisAssignment:
    """Rotation axis of every trainable slot, fixed for a whole training run."""
    axes: Tuple[RotationAxis, ...]

    def __len__(self) -> int:
        return len(self.axes)

    def names(self) -> List[str]:
        return [axis.name for axis in self.axes]

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "BasisAssignment":
        try:
            return cls(tuple(RotationAxis[name.upper()] for name in names))
        except KeyError as e:
            raise InvalidArgumentError(f"Unknown rotation axis {e}") from e


@dataclass(frozen=True)
class AnsatzLayout:
    """Ordered gates of U(theta) on `n_qubits` qubits.

    `mirror_of[slot]` names the slot whose layer this slot's layer mirrors
    (identity blocks) or is None for independently initialized slots.
    """
    n_qubits: int
    depth: int
    gates: Tuple[GateOp, ...]
    n_params: int
    circuit_kind: Optional[CircuitKind] = None
    mirror_of: Tuple[Optional[int], ...] = field(default=())
    identity_blocks: bool = False

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidArgumentError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.depth < 1:
            raise InvalidArgumentError(f"depth must be >= 1, got {self.depth}")
        slots = []
        for gate in self.gates:
            for qubit in gate.qubits():
                if not 0 <= qubit < self.n_qubits:
                    raise InvalidArgumentError(
                        f"Gate {gate.kind.name} addresses qubit {qubit} of {self.n_qubits}"
                    )
            if gate.param_slot is not None:
                slots.append(gate.param_slot)
        if sorted(slots) != list(range(self.n_params)):
            raise InvalidArgumentError(
                f"param slots must cover 0..{self.n_params - 1} exactly once, got {sorted(slots)}"
            )
        if not self.mirror_of:
            object.__setattr__(self, "mirror_of", (None,) * self.n_params)
        elif len(self.mirror_of) != self.n_params:
            raise InvalidArgumentError("mirror_of must have one entry per parameter slot")

    @property
    def n_cnots(self) -> int:
        return sum(1 for gate in self.gates if gate.kind == GateKind.CNOT)

    def check_kind_invariants(self) -> None:
        """Raise if the layout breaks the structural rules of its circuit kind."""
        if self.circuit_kind is None:
            return
        expected = self.depth * self.n_qubits
        if self.circuit_kind == CircuitKind.C3:
            expected *= 3
        if self.n_params != expected:
            raise InvalidArgumentError(
                f"{self.circuit_kind.name} needs {expected} trainable slots, has {self.n_params}"
            )
        if self.circuit_kind == CircuitKind.C4 and self.n_cnots:
            raise InvalidArgumentError("C4 must not contain CNOT gates")


def _entanglers(kind: CircuitKind, n_qubits: int, layer: int) -> List[GateOp]:
    if kind in (CircuitKind.C1, CircuitKind.C3):
        return [
            GateOp(GateKind.CNOT, target=i + 1, control=i, layer=layer)
            for i in range(n_qubits - 1)
        ]
    if kind == CircuitKind.C2:
        return [
            GateOp(GateKind.CNOT, target=i, control=i + 1, layer=layer)
            for i in reversed(range(n_qubits - 1))
        ]
    return []


def build_ansatz(
    circuit_kind: CircuitKind,
    n_qubits: int,
    depth: int,
    rng_seed: int,
    identity_blocks: bool = False,
) -> Tuple[AnsatzLayout, BasisAssignment]:
    """Build the layered circuit and draw its rotation bases.

    Pure in its arguments. With `identity_blocks`, every second layer is the
    mirror of the layer before it: the same gates in reverse order on the
    same bases, so that negated angles make the pair the identity.
    """
    if not isinstance(circuit_kind, CircuitKind):
        raise InvalidArgumentError(f"Unknown circuit kind: {circuit_kind!r}")
    if n_qubits < 1 or depth < 1:
        raise InvalidArgumentError(
            f"n_qubits and depth must be >= 1, got n_qubits={n_qubits}, depth={depth}"
        )

    rng = make_rng(rng_seed, RngPurpose.BASIS)
    gates: List[GateOp] = []
    axes: List[RotationAxis] = []
    mirror_of: List[Optional[int]] = []
    previous_layer: List[GateOp] = []

    for layer in range(depth):
        layer_gates: List[GateOp] = []
        if identity_blocks and layer % 2 == 1:
            for gate in reversed(previous_layer):
                if gate.kind == GateKind.CNOT:
                    layer_gates.append(
                        GateOp(GateKind.CNOT, target=gate.target, control=gate.control, layer=layer)
                    )
                    continue
                slot = len(axes)
                axes.append(axes[gate.param_slot])
                mirror_of.append(gate.param_slot)
                layer_gates.append(
                    GateOp(gate.kind, target=gate.target, param_slot=slot, layer=layer)
                )
        else:
            if circuit_kind == CircuitKind.C3:
                layer_axes = [axis for _ in range(n_qubits) for axis in FULL_ROTATION_AXES]
            else:
                draws = rng.integers(0, len(FULL_ROTATION_AXES), size=n_qubits)
                layer_axes = [FULL_ROTATION_AXES[d] for d in draws]
            per_qubit = len(layer_axes) // n_qubits
            for index, axis in enumerate(layer_axes):
                slot = len(axes)
                axes.append(axis)
                mirror_of.append(None)
                layer_gates.append(
                    GateOp(AXIS_TO_GATE[axis], index // per_qubit, param_slot=slot, layer=layer)
                )
            layer_gates.extend(_entanglers(circuit_kind, n_qubits, layer))
        gates.extend(layer_gates)
        previous_layer = layer_gates

    layout = AnsatzLayout(
        n_qubits=n_qubits,
        depth=depth,
        gates=tuple(gates),
        n_params=len(axes),
        circuit_kind=circuit_kind,
        mirror_of=tuple(mirror_of),
        identity_blocks=identity_blocks,
    )
    layout.check_kind_invariants()
    logger.debug(
        f"Built {circuit_kind.name} ansatz: {n_qubits} qubits, depth {depth}, "
        f"{layout.n_params} params, {layout.n_cnots} CNOTs"
    )
    return layout, BasisAssignment(tuple(axes))


def random_init(layout: AnsatzLayout, rng_seed: int) -> np.ndarray:
    """theta uniform on (-pi, pi] for every slot."""
    rng = make_rng(rng_seed, RngPurpose.INIT)
    return np.pi - rng.uniform(0.0, 2 * np.pi, size=layout.n_params)


def identity_block_init(layout: AnsatzLayout, bases: BasisAssignment, rng_seed: int) -> np.ndarray:
    """Random first halves, negated mirrors: every layer pair starts as the identity.

    An odd trailing layer stays randomly initialized.
    """
    if len(bases) != layout.n_params:
        raise InvalidArgumentError(
            f"Basis assignment has {len(bases)} axes for {layout.n_params} slots"
        )
    if layout.depth > 1 and not layout.identity_blocks:
        raise InvalidArgumentError(
            "Identity-block initialization needs a layout built with identity_blocks=True"
        )
    theta = random_init(layout, rng_seed)
    for slot, source in enumerate(layout.mirror_of):
        if source is not None:
            theta[slot] = -theta[source]
    return theta
