"""Test-split evaluation of a calibrated model."""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from .anogan import AnomalyScorer, ScoredSample
from .config import AnomalyConfig
from .data import Dataset
from .exceptions import InvalidArgumentError
from .gan.model import GanModel
from .metrics import ConfusionCounts, precision_recall_f1

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ["sample_id", "residual_loss", "discrimination_loss", "score", "predicted", "label"]


@dataclass
class EvaluationResult:
    counts: ConfusionCounts
    precision: float
    recall: float
    f1: float
    samples: List[ScoredSample] = field(default_factory=list)

    def scores_frame(self) -> pd.DataFrame:
        rows = [
            {
                "sample_id": s.row_id,
                "residual_loss": s.residual,
                "discrimination_loss": s.discrimination,
                "score": s.score,
                "predicted": int(bool(s.predicted_label)),
                "label": int(bool(s.true_label)),
            }
            for s in self.samples
        ]
        return pd.DataFrame(rows, columns=SCORE_COLUMNS)


def evaluate_predictions(samples: List[ScoredSample]) -> EvaluationResult:
    predicted = [bool(s.predicted_label) for s in samples]
    actual = [bool(s.true_label) for s in samples]
    counts = ConfusionCounts.from_predictions(predicted, actual)
    precision, recall, f1 = precision_recall_f1(predicted, actual)
    return EvaluationResult(counts, precision, recall, f1, samples)


def evaluate_run(
    model: GanModel,
    test_split: Dataset,
    threshold: float,
    config: AnomalyConfig,
    progress: bool = False,
) -> EvaluationResult:
    """Classify every test row and tally the confusion counts."""
    if len(test_split) == 0:
        raise InvalidArgumentError("Test split is empty")
    scorer = AnomalyScorer(model, config, progress=progress)
    samples = scorer.score_batch(
        test_split.features,
        labels=test_split.labels,
        threshold=threshold,
        row_ids=np.arange(len(test_split)),
    )
    result = evaluate_predictions(samples)
    logger.info(
        f"Evaluated {result.counts.total} rows at threshold {threshold:.5f}: "
        f"precision {result.precision:.4f}, recall {result.recall:.4f}, F1 {result.f1:.4f}"
    )
    return result
