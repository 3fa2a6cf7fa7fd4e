"""WGAN-GP training loop: n_critic critic steps per generator step."""
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config import RunConfig, TrainConfig
from ..data import Dataset, NormalizationBounds
from ..enums import GradientTarget, RngPurpose
from ..exceptions import ContractViolationError, InvalidArgumentError
from ..nn import backward, forward
from ..rng import RngStreams
from .checkpoint import save_checkpoint
from .generators import sample_latent
from .losses import critic_loss_and_gradients
from .model import CRITIC, GanModel

LOSS_COLUMNS = ["critic_loss", "generator_loss", "wasserstein_estimate"]


@dataclass(frozen=True)
class HistoryRecord:
    iteration: int
    critic_loss: float
    generator_loss: float
    wasserstein_estimate: float
    wall_time: float


@dataclass
class TrainingHistory:
    records: List[HistoryRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def to_frame(self) -> pd.DataFrame:
        columns = ["iteration"] + LOSS_COLUMNS + ["wall_time"]
        return pd.DataFrame([asdict(r) for r in self.records], columns=columns)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        return path


Callback = Callable[[GanModel, HistoryRecord], None]


class Trainer:
    """Runs the alternating critic/generator updates on one GanModel.

    Randomness comes from the training seed only: minibatch rows, latent
    draws, penalty interpolation weights and shot samples each have their
    own stream.
    """

    def __init__(self, model: GanModel, config: TrainConfig):
        self.model = model
        self.config = config
        self.streams = RngStreams(config.seed if config.seed is not None else model.seed)
        self.logger = logging.getLogger(__name__)
        self.last_critic_loss = float("nan")
        self.last_wasserstein = float("nan")

    @property
    def _shots_rng(self) -> Optional[np.random.Generator]:
        return self.streams[RngPurpose.SHOTS] if self.config.shots is not None else None

    def _latent_batch(self, m: int) -> np.ndarray:
        return sample_latent(
            self.model.variant, self.model.latent_dim, m, self.streams[RngPurpose.LATENT]
        )

    def _minibatch(self, features: np.ndarray) -> np.ndarray:
        n = features.shape[0]
        m = self.config.batch_size
        rows = self.streams[RngPurpose.MINIBATCH].choice(n, size=m, replace=n < m)
        return features[rows]

    def train_critic_step(self, real_batch) -> float:
        """One Adam step on the critic; the generator is only evaluated."""
        real_batch = np.atleast_2d(np.asarray(real_batch, dtype=np.float64))
        m = real_batch.shape[0]
        if m == 0:
            raise InvalidArgumentError("Critic step needs a non-empty real batch")
        x_gen = self.model.generate(self._latent_batch(m), self.config.shots, self._shots_rng)
        eps = self.streams[RngPurpose.PENALTY].uniform(0.0, 1.0, size=m)
        result = critic_loss_and_gradients(
            self.model.critic, real_batch, x_gen, eps, self.config.penalty_weight
        )
        self.model.apply_gradients(CRITIC, result.gradients)
        self.model.critic_steps += 1
        self.last_critic_loss = result.loss
        self.last_wasserstein = result.wasserstein
        return result.loss

    def train_generator_step(self, latent_batch=None) -> float:
        """One Adam step on every generator group, all gradients taken at the same point."""
        if latent_batch is None:
            latent_batch = self._latent_batch(self.config.batch_size)
        latent_batch = np.atleast_2d(np.asarray(latent_batch, dtype=np.float64))
        m = latent_batch.shape[0]
        generated = self.model.generator.forward(
            latent_batch,
            target=GradientTarget.PARAMETERS,
            shots=self.config.shots,
            rng=self._shots_rng,
            mode=self.config.gradient_mode,
            fd_step=self.config.fd_step,
        )
        scores, cache = forward(self.model.critic, generated.outputs)
        loss = -float(np.mean(scores))
        _, upstream = backward(self.model.critic, cache, np.full((m, 1), -1.0 / m))
        grads, _ = generated.backward(upstream)
        for group, grad in grads.items():
            self.model.apply_gradients(group, grad)
        self.model.generator_steps += 1
        return loss

    def _checkpoint_due(self, iteration: int) -> bool:
        every = self.config.checkpoint_every
        return every > 0 and iteration % every == 0

    def train(
        self,
        dataset: Dataset,
        callbacks: Sequence[Callback] = (),
        checkpoint_dir: Optional[Union[str, Path]] = None,
        run_config: Optional[RunConfig] = None,
        bounds: Optional[NormalizationBounds] = None,
    ) -> TrainingHistory:
        """Runs the configured iterations; saves to `checkpoint_dir` every `checkpoint_every`."""
        if dataset.n_fraud > 0:
            raise ContractViolationError(f"Training data contains {dataset.n_fraud} anomalous rows")
        if len(dataset) == 0:
            raise InvalidArgumentError("Training data is empty")
        if dataset.n_features != self.model.data_dim:
            raise InvalidArgumentError(
                f"Data has {dataset.n_features} features, model generates {self.model.data_dim}"
            )

        cfg = self.config
        history = TrainingHistory()
        start = time.perf_counter()
        show = cfg.progress and sys.stderr.isatty()
        self.logger.info(
            f"Training {cfg.total_generator_iters} generator iterations on {len(dataset)} rows "
            f"(n_critic={cfg.n_critic}, batch={cfg.batch_size}, shots={cfg.shots})"
        )
        iterations = range(1, cfg.total_generator_iters + 1)
        for iteration in tqdm(iterations, disable=not show, desc="train"):
            for _ in range(cfg.n_critic):
                self.train_critic_step(self._minibatch(dataset.features))
            generator_loss = self.train_generator_step()
            record = HistoryRecord(
                iteration,
                self.last_critic_loss,
                generator_loss,
                self.last_wasserstein,
                time.perf_counter() - start,
            )
            history.records.append(record)
            if iteration % cfg.log_every == 0:
                self.logger.info(
                    f"iter {iteration}: critic {record.critic_loss:.5f}, "
                    f"generator {record.generator_loss:.5f}, W {record.wasserstein_estimate:.5f}"
                )
            if checkpoint_dir is not None and self._checkpoint_due(iteration):
                target = Path(checkpoint_dir) / f"iter_{iteration:06d}"
                save_checkpoint(self.model, target, run_config, bounds)
            for callback in callbacks:
                callback(self.model, record)
        return history
