from enum import Enum, auto


class CircuitKind(Enum):
    C1 = auto()
    C2 = auto()
    C3 = auto()
    C4 = auto()


class RotationAxis(Enum):
    X = auto()
    Y = auto()
    Z = auto()


class GateKind(Enum):
    RX = auto()
    RY = auto()
    RZ = auto()
    CNOT = auto()


class Activation(Enum):
    LEAKY_RELU = auto()
    SIGMOID = auto()
    IDENTITY = auto()


class GeneratorVariant(Enum):
    CLASSICAL = auto()
    QUANTUM = auto()


class InitStrategy(Enum):
    RANDOM = auto()
    IDENTITY_BLOCK = auto()


class GradientMode(Enum):
    FORWARD_DIFF = auto()
    PARAM_SHIFT = auto()


class RngPurpose(Enum):
    BASIS = 0
    INIT = 1
    SHOTS = 2
    MINIBATCH = 3
    LATENT = 4
    PENALTY = 5
    SCORING = 6
    SPLIT = 7
    SYNTH = 8
    BOOTSTRAP = 9


class GradientTarget(Enum):
    PARAMETERS = auto()
    LATENT = auto()
