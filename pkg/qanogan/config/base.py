import os
from dataclasses import dataclass, field
from typing import List, Optional

from ..enums import (
    Activation,
    CircuitKind,
    GeneratorVariant,
    GradientMode,
    InitStrategy,
)
from ..exceptions import ConfigError

OUTPUT_DIR_ENV = "QANOGAN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"


def default_gradient_mode(shots: Optional[int]) -> GradientMode:
    """Forward differences for exact expectations, parameter shift for sampled ones."""
    return GradientMode.FORWARD_DIFF if shots is None else GradientMode.PARAM_SHIFT


def _require(errors: List[str], condition: bool, key: str) -> None:
    if not condition:
        errors.append(key)


def _raise_if(errors: List[str], what: str) -> None:
    if errors:
        raise ConfigError(f"Invalid {what} settings", errors)


@dataclass
class AnsatzConfig:
    """Quantum circuit shape for the quantum generator."""
    circuit_kind: CircuitKind = CircuitKind.C1
    depth: int = 1
    init_strategy: InitStrategy = InitStrategy.RANDOM

    def __post_init__(self):
        errors: List[str] = []
        _require(errors, self.depth >= 1, "ansatz.depth")
        _raise_if(errors, "ansatz")


@dataclass
class GeneratorConfig:
    """Generator variant and dimensions.

    `classical_body` lists the widths of the leaky-ReLU layers of g_c after
    the latent input; an empty body leaves the upscaling layer alone.
    """
    variant: GeneratorVariant = GeneratorVariant.QUANTUM
    latent_dim: int = 9
    data_dim: int = 29
    classical_body: List[int] = field(default_factory=list)
    ansatz: AnsatzConfig = field(default_factory=AnsatzConfig)
    use_upscaling: bool = True
    rescale_expectations: bool = False

    def __post_init__(self):
        errors: List[str] = []
        _require(errors, self.latent_dim >= 1, "generator.latent_dim")
        _require(errors, self.data_dim >= 1, "generator.data_dim")
        _require(errors, all(w >= 1 for w in self.classical_body), "generator.classical_body")
        if not self.use_upscaling:
            _require(errors, self.body_out_dim == self.data_dim, "generator.data_dim")
        if self.variant == GeneratorVariant.QUANTUM:
            _require(errors, not self.classical_body, "generator.classical_body")
            _require(errors, self.latent_dim <= 20, "generator.latent_dim")
        _raise_if(errors, "generator")

    @property
    def body_out_dim(self) -> int:
        if self.variant == GeneratorVariant.CLASSICAL and self.classical_body:
            return self.classical_body[-1]
        return self.latent_dim


@dataclass
class CriticConfig:
    """Hidden widths of D; [16, 8] gives [M, 16, 8, 1], [3, 3] the reduced [N, 3, 3, 1]."""
    hidden: List[int] = field(default_factory=lambda: [16, 8])
    activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        errors: List[str] = []
        _require(errors, all(w >= 1 for w in self.hidden), "critic.hidden")
        # The penalty's parameter gradient assumes locally linear layers.
        _require(errors, self.activation != Activation.SIGMOID, "critic.activation")
        _raise_if(errors, "critic")


@dataclass
class TrainConfig:
    """WGAN-GP training hyperparameters."""
    learning_rate: float = 0.0002
    beta1: float = 0.5
    beta2: float = 0.999
    epsilon: float = 1e-7
    penalty_weight: float = 10.0
    batch_size: int = 64
    n_critic: int = 5
    total_generator_iters: int = 2700
    shots: Optional[int] = None
    gradient_mode: Optional[GradientMode] = None
    fd_step: float = 1e-4
    seed: Optional[int] = None
    log_every: int = 100
    checkpoint_every: int = 0
    progress: bool = True

    def __post_init__(self):
        if self.gradient_mode is None:
            self.gradient_mode = default_gradient_mode(self.shots)
        errors: List[str] = []
        _require(errors, self.learning_rate > 0, "train.learning_rate")
        _require(errors, 0 <= self.beta1 < 1, "train.beta1")
        _require(errors, 0 <= self.beta2 < 1, "train.beta2")
        _require(errors, self.epsilon > 0, "train.epsilon")
        _require(errors, self.penalty_weight >= 0, "train.penalty_weight")
        _require(errors, self.batch_size >= 1, "train.batch_size")
        _require(errors, self.n_critic >= 1, "train.n_critic")
        _require(errors, self.total_generator_iters >= 0, "train.total_generator_iters")
        _require(errors, self.shots is None or self.shots >= 1, "train.shots")
        _require(errors, self.fd_step > 0, "train.fd_step")
        _require(
            errors,
            not (self.shots is not None and self.gradient_mode == GradientMode.FORWARD_DIFF),
            "train.gradient_mode",
        )
        _require(errors, self.log_every >= 1, "train.log_every")
        _require(errors, self.checkpoint_every >= 0, "train.checkpoint_every")
        _raise_if(errors, "train")


@dataclass
class AnomalyConfig:
    """Latent optimization and scoring; Adam defaults match training."""
    alpha: float = 1.0
    latent_iters: int = 500
    restarts: int = 1
    learning_rate: float = 0.0002
    beta1: float = 0.5
    beta2: float = 0.999
    epsilon: float = 1e-7
    shots: Optional[int] = None
    gradient_mode: Optional[GradientMode] = None
    fd_step: float = 1e-4
    seed: Optional[int] = None
    batch_size: int = 512

    def __post_init__(self):
        if self.gradient_mode is None:
            self.gradient_mode = default_gradient_mode(self.shots)
        errors: List[str] = []
        _require(errors, self.alpha > 0, "anomaly.alpha")
        _require(errors, self.latent_iters >= 0, "anomaly.latent_iters")
        _require(errors, self.restarts >= 1, "anomaly.restarts")
        _require(errors, self.learning_rate > 0, "anomaly.learning_rate")
        _require(errors, self.shots is None or self.shots >= 1, "anomaly.shots")
        _require(
            errors,
            not (self.shots is not None and self.gradient_mode == GradientMode.FORWARD_DIFF),
            "anomaly.gradient_mode",
        )
        _require(errors, self.fd_step > 0, "anomaly.fd_step")
        _require(errors, self.batch_size >= 1, "anomaly.batch_size")
        _raise_if(errors, "anomaly")


@dataclass
class SplitSpec:
    """Train/calibration/test partition.

    `train_fraction` of the non-fraud rows go to training; `calibration_fraction`
    of the fraud rows go to calibration together with as many non-frauds, the
    remaining frauds to a test set padded with non-frauds to `test_fraud_fraction`.
    """
    train_fraction: float = 0.8
    calibration_fraction: float = 0.5
    test_fraud_fraction: float = 0.25
    seed: Optional[int] = None
    max_train_rows: Optional[int] = None
    max_test_rows: Optional[int] = None

    def __post_init__(self):
        errors: List[str] = []
        _require(errors, 0 < self.train_fraction < 1, "split.train_fraction")
        _require(errors, 0 < self.calibration_fraction < 1, "split.calibration_fraction")
        _require(errors, 0 < self.test_fraud_fraction < 1, "split.test_fraud_fraction")
        _require(
            errors, self.max_train_rows is None or self.max_train_rows >= 1, "split.max_train_rows"
        )
        _require(
            errors, self.max_test_rows is None or self.max_test_rows >= 4, "split.max_test_rows"
        )
        _raise_if(errors, "split")


@dataclass
class SynthConfig:
    """Desk-scale synthetic data: correlated Gaussian normals, uniform anomalies."""
    n_normal: int = 2000
    n_anomalous: int = 200
    dim: int = 6
    mean: float = 0.5
    std: float = 0.08
    correlation: float = 0.5
    seed: Optional[int] = None

    def __post_init__(self):
        errors: List[str] = []
        _require(errors, self.n_normal >= 0, "synth.n_normal")
        _require(errors, self.n_anomalous >= 0, "synth.n_anomalous")
        _require(errors, self.dim >= 1, "synth.dim")
        _require(errors, 0 <= self.mean <= 1, "synth.mean")
        _require(errors, self.std > 0, "synth.std")
        _require(errors, 0 <= self.correlation < 1, "synth.correlation")
        _raise_if(errors, "synth")


@dataclass
class DataConfig:
    """Input CSV and the feature subset to keep (None keeps all)."""
    path: Optional[str] = None
    n_features: int = 29
    feature_indices: Optional[List[int]] = None

    def __post_init__(self):
        errors: List[str] = []
        _require(errors, self.n_features >= 1, "data.n_features")
        if self.feature_indices is not None:
            _require(
                errors,
                len(set(self.feature_indices)) == len(self.feature_indices)
                and all(0 <= i < self.n_features for i in self.feature_indices),
                "data.feature_indices",
            )
        _raise_if(errors, "data")

    @property
    def model_dim(self) -> int:
        if self.feature_indices is not None:
            return len(self.feature_indices)
        return self.n_features


@dataclass
class RunConfig:
    """Everything one reproducible run needs; sub-seeds default to `seed`."""
    name: str = "run"
    seed: int = 0
    output_dir: Optional[str] = None
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    critic: CriticConfig = field(default_factory=CriticConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    anomaly: AnomalyConfig = field(default_factory=AnomalyConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    data: DataConfig = field(default_factory=DataConfig)
    synth: Optional[SynthConfig] = None

    def __post_init__(self):
        if self.output_dir is None:
            self.output_dir = os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)
        self.reseed(self.seed, only_missing=True)
        errors: List[str] = []
        _require(errors, self.generator.data_dim == self.data.model_dim, "generator.data_dim")
        if self.synth is not None:
            _require(errors, self.synth.dim == self.data.n_features, "synth.dim")
        _raise_if(errors, "run")

    def reseed(self, seed: int, only_missing: bool = False) -> None:
        self.seed = seed
        for section in (self.train, self.anomaly, self.split, self.synth):
            if section is not None and (section.seed is None or not only_missing):
                section.seed = seed
