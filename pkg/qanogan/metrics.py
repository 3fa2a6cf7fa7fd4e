"""Classification counts, F1 and percentile-bootstrap confidence intervals."""
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix, f1_score, precision_score, recall_score

from .enums import RngPurpose
from .exceptions import InvalidArgumentError
from .rng import make_rng

DEFAULT_RESAMPLES = 1000
DEFAULT_LEVEL = 0.95


def _as_labels(predicted: Sequence[bool], actual: Sequence[bool]) -> Tuple[np.ndarray, np.ndarray]:
    predicted = np.asarray(predicted, dtype=bool).reshape(-1)
    actual = np.asarray(actual, dtype=bool).reshape(-1)
    if predicted.shape != actual.shape:
        raise InvalidArgumentError(f"{predicted.size} predictions for {actual.size} labels")
    return predicted, actual


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise InvalidArgumentError(f"Confusion counts must be non-negative: {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_predictions(
        cls, predicted: Sequence[bool], actual: Sequence[bool]
    ) -> "ConfusionCounts":
        predicted, actual = _as_labels(predicted, actual)
        tn, fp, fn, tp = confusion_matrix(actual, predicted, labels=[False, True]).ravel()
        return cls(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))


def precision_recall_f1(
    predicted: Sequence[bool], actual: Sequence[bool]
) -> Tuple[float, float, float]:
    """Scores of the anomalous class; 0 wherever a ratio is undefined."""
    predicted, actual = _as_labels(predicted, actual)
    if predicted.size == 0:
        return 0.0, 0.0, 0.0
    kwargs = dict(pos_label=True, zero_division=0)
    return (
        float(precision_score(actual, predicted, **kwargs)),
        float(recall_score(actual, predicted, **kwargs)),
        float(f1_score(actual, predicted, **kwargs)),
    )


class ConfidenceInterval(NamedTuple):
    low: float
    high: float
    mean: float


def bootstrap_ci(
    values: Sequence[float],
    n_resamples: int = DEFAULT_RESAMPLES,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> ConfidenceInterval:
    """Percentile bootstrap interval of the mean."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise InvalidArgumentError("Bootstrap needs at least one value")
    if not 0 < level < 1:
        raise InvalidArgumentError(f"Confidence level must be in (0, 1), got {level}")
    if n_resamples < 1:
        raise InvalidArgumentError(f"Need at least one resample, got {n_resamples}")
    if np.all(values == values[0]):
        c = float(values[0])
        return ConfidenceInterval(c, c, c)

    rng = make_rng(seed, RngPurpose.BOOTSTRAP)
    rows = rng.integers(0, values.size, size=(n_resamples, values.size))
    means = values[rows].mean(axis=1)
    tail = (1.0 - level) / 2.0 * 100.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    mean = float(values.mean())
    return ConfidenceInterval(min(float(low), mean), max(float(high), mean), mean)
