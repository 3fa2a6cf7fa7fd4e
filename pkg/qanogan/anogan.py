"""Anomaly scoring by latent-variable optimization against a trained WGAN.

For each input x the generator is inverted with Adam on

    S(z) = (1/alpha) ||x - G(z)||_1 + alpha |D(x) - D(G(z))|

and the lowest score met over all steps and restarts is the anomaly score.
Rows are optimized together as one batch, but each row's initial latents
come from a stream keyed by its row id, so analytic-mode scores do not
depend on how rows are batched.
"""
import logging
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from sklearn.metrics import precision_recall_curve
from tqdm import tqdm

from .config import AnomalyConfig
from .enums import GeneratorVariant, GradientTarget, RngPurpose
from .exceptions import InvalidArgumentError
from .gan.model import GanModel
from .nn import AdamState, DenseNetwork, adam_step, backward, forward
from .rng import make_rng


def residual_loss(x, x_g) -> Union[float, np.ndarray]:
    """||x - x_g||_1 over the last axis."""
    x = np.asarray(x, dtype=np.float64)
    x_g = np.asarray(x_g, dtype=np.float64)
    if x.shape != x_g.shape:
        raise InvalidArgumentError(f"Shapes differ: {x.shape} and {x_g.shape}")
    loss = np.abs(x - x_g).sum(axis=-1)
    return float(loss) if loss.ndim == 0 else loss


def discrimination_loss(critic: DenseNetwork, x, x_g) -> Union[float, np.ndarray]:
    """|D(x) - D(x_g)|."""
    d = np.abs(critic(x) - critic(x_g))[..., 0]
    return float(d) if d.ndim == 0 else d


def anomaly_score(l_r, l_d, alpha: float = 1.0):
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha}")
    return l_r / alpha + alpha * l_d


@dataclass
class ScoredSample:
    x: np.ndarray
    z_opt: np.ndarray
    residual: float
    discrimination: float
    score: float
    predicted_label: Optional[bool] = None
    true_label: Optional[bool] = None
    row_id: int = 0


@dataclass
class LatentSearch:
    """Best latents per row.

    `trace` holds S at every evaluation, shape (rows, restarts, latent_iters + 1).
    """
    z_opt: np.ndarray
    residual: np.ndarray
    discrimination: np.ndarray
    score: np.ndarray
    trace: np.ndarray


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    f1: float


class AnomalyScorer:
    """Scores rows against a fixed GanModel; the model is never modified."""

    def __init__(self, model: GanModel, config: AnomalyConfig, progress: bool = False):
        self.model = model
        self.config = config
        self.seed = config.seed if config.seed is not None else model.seed
        self.progress = progress and sys.stderr.isatty()
        self.logger = logging.getLogger(__name__)

    def _initial_latents(self, row_ids: np.ndarray) -> np.ndarray:
        """(restarts, rows, N) starting points from per-row streams."""
        n = self.model.latent_dim
        restarts = self.config.restarts
        draws = []
        for row_id in row_ids:
            rng = make_rng(self.seed, RngPurpose.SCORING, int(row_id))
            if self.model.variant == GeneratorVariant.QUANTUM:
                draws.append(rng.uniform(-np.pi, np.pi, size=(restarts, n)))
            else:
                draws.append(rng.uniform(0.0, 1.0, size=(restarts, n)))
        return np.stack(draws, axis=1)

    def evaluate_latent(self, xs, zs, d_real=None, shots_rng=None):
        """S at latents `zs` for rows `xs`: (L_R, L_D, S, dS/dz), one entry per row."""
        cfg = self.config
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        if d_real is None:
            d_real = self.model.critic(xs)[:, 0]
        generated = self.model.generator.forward(
            zs,
            target=GradientTarget.LATENT,
            shots=cfg.shots,
            rng=shots_rng,
            mode=cfg.gradient_mode,
            fd_step=cfg.fd_step,
        )
        x_g = generated.outputs
        d_gen, cache = forward(self.model.critic, x_g)
        d_gen = d_gen[:, 0]
        l_r = np.abs(xs - x_g).sum(axis=1)
        l_d = np.abs(d_real - d_gen)
        score = l_r / cfg.alpha + cfg.alpha * l_d

        # dS/dx_g; the critic part is -alpha sign(D(x) - D(x_g)) grad D(x_g)
        _, critic_part = backward(
            self.model.critic, cache, (-cfg.alpha * np.sign(d_real - d_gen))[:, None]
        )
        upstream = -np.sign(xs - x_g) / cfg.alpha + critic_part
        _, grad_z = generated.backward(upstream)
        return l_r, l_d, score, grad_z

    def optimize_latent(self, xs, row_ids: Optional[Sequence[int]] = None) -> LatentSearch:
        """Adam on z for every row, keeping the best score over steps and restarts."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        if xs.shape[1] != self.model.data_dim:
            raise InvalidArgumentError(
                f"Rows have {xs.shape[1]} features, model generates {self.model.data_dim}"
            )
        rows = xs.shape[0]
        row_ids = np.arange(rows) if row_ids is None else np.asarray(row_ids, dtype=np.int64)
        cfg = self.config
        d_real = self.model.critic(xs)[:, 0]
        shots_rng = None
        if cfg.shots is not None:
            shots_rng = make_rng(self.seed, RngPurpose.SHOTS, int(row_ids[0]), rows)

        best_z = np.zeros((rows, self.model.latent_dim))
        best = np.full(rows, np.inf)
        best_r = np.zeros(rows)
        best_d = np.zeros(rows)
        trace = np.zeros((rows, cfg.restarts, cfg.latent_iters + 1))

        for restart, zs in enumerate(self._initial_latents(row_ids)):
            state = AdamState.create(zs.size, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
            for step in range(cfg.latent_iters + 1):
                l_r, l_d, score, grad_z = self.evaluate_latent(xs, zs, d_real, shots_rng)
                trace[:, restart, step] = score
                improved = score < best
                best = np.where(improved, score, best)
                best_r = np.where(improved, l_r, best_r)
                best_d = np.where(improved, l_d, best_d)
                best_z[improved] = zs[improved]
                if step < cfg.latent_iters:
                    flat, state = adam_step(state, zs.ravel(), grad_z.ravel())
                    zs = flat.reshape(zs.shape)
        return LatentSearch(best_z, best_r, best_d, best, trace)

    def score_batch(
        self,
        xs,
        labels: Optional[Sequence[bool]] = None,
        threshold: Optional[float] = None,
        row_ids: Optional[Sequence[int]] = None,
    ) -> List[ScoredSample]:
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        ids = np.arange(xs.shape[0]) if row_ids is None else np.asarray(row_ids, dtype=np.int64)
        size = self.config.batch_size
        samples: List[ScoredSample] = []
        starts = range(0, xs.shape[0], size)
        for start in tqdm(starts, disable=not self.progress, desc="score"):
            chunk = slice(start, start + size)
            search = self.optimize_latent(xs[chunk], ids[chunk])
            for k, row in enumerate(range(*chunk.indices(xs.shape[0]))):
                score = float(search.score[k])
                samples.append(
                    ScoredSample(
                        x=xs[row],
                        z_opt=search.z_opt[k],
                        residual=float(search.residual[k]),
                        discrimination=float(search.discrimination[k]),
                        score=score,
                        predicted_label=None if threshold is None else bool(score >= threshold),
                        true_label=None if labels is None else bool(labels[row]),
                        row_id=int(ids[row]),
                    )
                )
            self.logger.debug(f"Scored rows {start}..{start + len(search.score) - 1}")
        if samples:
            scores = np.array([s.score for s in samples])
            self.logger.info(
                f"Scored {len(samples)} rows: mean S {scores.mean():.5f}, "
                f"min {scores.min():.5f}, max {scores.max():.5f}"
            )
        return samples

    def classify(self, x, threshold: float, row_id: int = 0) -> ScoredSample:
        """Score one row and flag it when S >= threshold."""
        x = np.asarray(x, dtype=np.float64).reshape(1, -1)
        return self.score_batch(x, threshold=threshold, row_ids=[row_id])[0]


def calibrate_threshold(scores: Sequence[float], labels: Sequence[bool]) -> CalibrationResult:
    """Exhaustive F1-maximizing cut, flagging rows with score >= threshold.

    Candidates are the lowest score (flag everything) and every midpoint
    between consecutive distinct scores; ties go to the lowest threshold.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels, dtype=bool).reshape(-1)
    if scores.shape != labels.shape:
        raise InvalidArgumentError(f"{scores.size} scores for {labels.size} labels")
    if labels.all() or not labels.any():
        raise InvalidArgumentError("Calibration needs both anomalous and normal rows")

    # cut j flags score >= cuts[j]; the curve's closing (1, 0) point has no cut
    precision, recall, cuts = precision_recall_curve(labels, scores, pos_label=True)
    precision, recall = precision[:-1], recall[:-1]
    total = precision + recall
    f1 = np.divide(2 * precision * recall, total, out=np.zeros_like(total), where=total > 0)

    best = int(np.argmax(f1))
    threshold = cuts[0] if best == 0 else 0.5 * (cuts[best - 1] + cuts[best])
    return CalibrationResult(float(threshold), float(f1[best]))
