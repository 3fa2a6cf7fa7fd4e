"""GanModel: generator, critic and one Adam state per parameter group."""
import logging
from typing import Dict, Optional, Union

import numpy as np

from ..config import CriticConfig, GeneratorConfig, TrainConfig
from ..enums import Activation, GeneratorVariant, InitStrategy, RngPurpose
from ..exceptions import InvalidArgumentError
from ..nn import AdamState, DenseNetwork, adam_step
from ..qsim import build_ansatz, identity_block_init, random_init
from ..rng import make_rng
from . import losses
from .generators import ClassicalGenerator, QuantumGenerator

CRITIC = "critic"

Generator = Union[QuantumGenerator, ClassicalGenerator]

# sub-keys of the INIT stream, one per network
_CRITIC_INIT = 1
_UPSCALING_INIT = 2
_BODY_INIT = 3


def build_critic(data_dim: int, config: CriticConfig, seed: int) -> DenseNetwork:
    dims = [data_dim] + list(config.hidden) + [1]
    activations = [config.activation] * len(config.hidden) + [Activation.IDENTITY]
    return DenseNetwork.build(dims, activations, make_rng(seed, RngPurpose.INIT, _CRITIC_INIT))


def build_generator(config: GeneratorConfig, seed: int) -> Generator:
    upscaling = None
    if config.use_upscaling:
        upscaling = DenseNetwork.build(
            [config.body_out_dim, config.data_dim],
            [Activation.SIGMOID],
            make_rng(seed, RngPurpose.INIT, _UPSCALING_INIT),
        )
    if config.variant == GeneratorVariant.CLASSICAL:
        body = None
        if config.classical_body:
            widths = [config.latent_dim] + list(config.classical_body)
            body = DenseNetwork.build(
                widths,
                [Activation.LEAKY_RELU] * len(config.classical_body),
                make_rng(seed, RngPurpose.INIT, _BODY_INIT),
            )
        return ClassicalGenerator(config.latent_dim, body, upscaling)

    ansatz = config.ansatz
    identity_blocks = ansatz.init_strategy == InitStrategy.IDENTITY_BLOCK
    layout, bases = build_ansatz(
        ansatz.circuit_kind, config.latent_dim, ansatz.depth, seed, identity_blocks=identity_blocks
    )
    if identity_blocks:
        theta = identity_block_init(layout, bases, seed)
    else:
        theta = random_init(layout, seed)
    return QuantumGenerator(layout, bases, theta, upscaling, config.rescale_expectations)


class GanModel:
    """A WGAN-GP pair (G, D) plus its optimizer state.

    Parameter groups are `critic` and the generator's own groups (`theta`
    or `body`, and `upscaling`); each has a separate Adam state.
    """

    def __init__(
        self,
        generator: Generator,
        critic: DenseNetwork,
        train_config: Optional[TrainConfig] = None,
        seed: int = 0,
    ):
        if critic.out_dim != 1:
            raise InvalidArgumentError(f"Critic must output a scalar, got {critic.out_dim} outputs")
        if critic.in_dim != generator.data_dim:
            raise InvalidArgumentError(
                f"Critic expects {critic.in_dim} inputs, generator produces {generator.data_dim}"
            )
        self.generator = generator
        self.critic = critic
        self.seed = seed
        self.train_config = train_config or TrainConfig()
        self.critic_steps = 0
        self.generator_steps = 0
        self.logger = logging.getLogger(__name__)
        self.optimizers: Dict[str, AdamState] = {
            name: self._new_optimizer(values.size) for name, values in self.parameters().items()
        }

    @classmethod
    def build(
        cls,
        generator_config: GeneratorConfig,
        critic_config: CriticConfig,
        train_config: TrainConfig,
        seed: int,
    ) -> "GanModel":
        generator = build_generator(generator_config, seed)
        critic = build_critic(generator.data_dim, critic_config, seed)
        model = cls(generator, critic, train_config, seed)
        sizes = {name: p.size for name, p in model.parameters().items()}
        model.logger.debug(f"Built {generator_config.variant.name} model: {sizes}")
        return model

    @property
    def variant(self) -> GeneratorVariant:
        return self.generator.variant

    @property
    def latent_dim(self) -> int:
        return self.generator.latent_dim

    @property
    def data_dim(self) -> int:
        return self.generator.data_dim

    def _new_optimizer(self, size: int) -> AdamState:
        cfg = self.train_config
        return AdamState.create(size, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    def parameters(self) -> Dict[str, np.ndarray]:
        groups = {CRITIC: self.critic.flat_parameters()}
        groups.update(self.generator.parameters())
        return groups

    def apply_gradients(self, group: str, grads: np.ndarray) -> None:
        """One Adam step on a single parameter group."""
        if group not in self.optimizers:
            raise InvalidArgumentError(f"Unknown parameter group {group!r}")
        current = self.parameters()[group]
        updated, self.optimizers[group] = adam_step(self.optimizers[group], current, grads)
        if group == CRITIC:
            self.critic.set_flat_parameters(updated)
        else:
            self.generator.set_parameters(group, updated)

    def generate(
        self, zs, shots: Optional[int] = None, rng: Optional[np.random.Generator] = None
    ) -> np.ndarray:
        return self.generator.generate(zs, shots=shots, rng=rng)

    def critic_loss(self, real_batch, latent_batch, eps, penalty_weight: float) -> float:
        x_gen = self.generate(latent_batch)
        if len(x_gen) != len(np.atleast_2d(real_batch)):
            raise InvalidArgumentError("Real and latent batches must have the same size")
        return losses.critic_loss(self.critic, real_batch, x_gen, eps, penalty_weight)

    def generator_loss(self, latent_batch) -> float:
        return losses.generator_loss(self.critic, self.generate(latent_batch))
