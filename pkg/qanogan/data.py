"""Transaction datasets: CSV ingestion, min-max scaling, splits and synthetic data.

Files follow the credit-card schema: a `Time` column, the feature columns
V1..V{M-1} and `Amount`, then the 0/1 `Class` label. `Time` is dropped on
load and written back as the row index.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import MinMaxScaler

from .config import SplitSpec, SynthConfig
from .enums import RngPurpose
from .exceptions import DataParseError, InvalidArgumentError
from .rng import make_rng

logger = logging.getLogger(__name__)

TIME_COLUMN = "Time"
LABEL_COLUMN = "Class"
AMOUNT_COLUMN = "Amount"
DEFAULT_N_FEATURES = 29


def feature_columns(n_features: int = DEFAULT_N_FEATURES) -> List[str]:
    """V1..V{n-1} followed by Amount."""
    if n_features < 1:
        raise InvalidArgumentError(f"Need at least one feature, got {n_features}")
    return [f"V{i}" for i in range(1, n_features)] + [AMOUNT_COLUMN]


@dataclass(frozen=True)
class NormalizationBounds:
    """Per-feature (min, max) of the rows the scaling was fitted on.

    Scaling is a clipping `MinMaxScaler` rebuilt from the two bound rows, so
    bounds read back from a checkpoint scale exactly like freshly fitted ones.
    """
    lows: np.ndarray
    highs: np.ndarray
    scaler: MinMaxScaler = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lows = np.asarray(self.lows, dtype=np.float64).reshape(-1)
        highs = np.asarray(self.highs, dtype=np.float64).reshape(-1)
        if lows.shape != highs.shape or lows.size == 0:
            raise InvalidArgumentError(f"Bounds need matching lows and highs, got {lows} {highs}")
        if np.any(highs < lows):
            raise InvalidArgumentError("Upper bounds must not be below lower bounds")
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)
        scaler = MinMaxScaler(clip=True).fit(np.vstack([lows, highs]))
        object.__setattr__(self, "scaler", scaler)

    @classmethod
    def fit(cls, features: np.ndarray) -> "NormalizationBounds":
        features = np.asarray(features, dtype=np.float64)
        if features.shape[0] == 0:
            raise InvalidArgumentError("Cannot fit normalization bounds on an empty dataset")
        scaler = MinMaxScaler(clip=True).fit(features)
        return cls(scaler.data_min_, scaler.data_max_)

    @property
    def spans(self) -> np.ndarray:
        return self.highs - self.lows

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Min-max scale into [0, 1]; constant features map to 0."""
        scaled = self.scaler.transform(np.asarray(features, dtype=np.float64))
        scaled[:, self.spans == 0] = 0.0
        return scaled

    def invert(self, features: np.ndarray) -> np.ndarray:
        return self.scaler.inverse_transform(np.asarray(features, dtype=np.float64))


@dataclass
class Dataset:
    """Feature matrix (rows, M) with boolean fraud labels."""
    features: np.ndarray
    labels: np.ndarray
    feature_names: List[str] = field(default_factory=list)
    bounds: Optional[NormalizationBounds] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise InvalidArgumentError(f"Features must be 2-D, got shape {self.features.shape}")
        self.labels = np.asarray(self.labels, dtype=bool).reshape(-1)
        if self.features.shape[0] != self.labels.size:
            raise InvalidArgumentError(
                f"{self.features.shape[0]} feature rows but {self.labels.size} labels"
            )
        if not self.feature_names:
            self.feature_names = feature_columns(self.n_features)
        if len(self.feature_names) != self.n_features:
            raise InvalidArgumentError(
                f"{len(self.feature_names)} feature names for {self.n_features} features"
            )

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_fraud(self) -> int:
        return int(self.labels.sum())

    def take(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return replace(self, features=self.features[indices], labels=self.labels[indices])


@dataclass
class Splits:
    train: Dataset
    calibration: Dataset
    test: Dataset


def load_csv(path: Union[str, Path], n_features: int = DEFAULT_N_FEATURES) -> Dataset:
    """Read a credit-card schema file; `Time` is dropped and `Class` becomes the label."""
    path = Path(path)
    names = feature_columns(n_features)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in [TIME_COLUMN] + names + [LABEL_COLUMN] if c not in frame.columns]
    if missing:
        raise DataParseError(f"Missing columns in {path}", column=", ".join(missing))

    columns = {}
    for name in names + [LABEL_COLUMN]:
        values = pd.to_numeric(frame[name].str.strip(), errors="coerce").to_numpy(dtype=np.float64)
        # NaN marks unparseable cells; "inf" and overflowing literals parse as infinite
        bad = ~np.isfinite(values)
        if bad.any():
            row = int(np.argmax(bad)) + 1
            cell = frame[name].iloc[row - 1]
            kind = "Non-numeric" if np.isnan(values[row - 1]) else "Non-finite"
            raise DataParseError(f"{kind} value {cell!r}", row=row, column=name)
        columns[name] = values

    labels = columns.pop(LABEL_COLUMN)
    bad_labels = ~np.isin(labels, (0.0, 1.0))
    if bad_labels.any():
        row = int(np.argmax(bad_labels)) + 1
        raise DataParseError("Class must be 0 or 1", row=row, column=LABEL_COLUMN)

    features = np.column_stack([columns[n] for n in names]).reshape(len(frame), n_features)
    dataset = Dataset(features, labels.astype(bool), names)
    logger.info(f"Loaded {len(dataset)} rows ({dataset.n_fraud} fraud) from {path}")
    return dataset


def write_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write in the same schema load_csv reads; Time carries the row index."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dataset.features, columns=dataset.feature_names)
    frame.insert(0, TIME_COLUMN, np.arange(len(dataset), dtype=np.float64))
    frame[LABEL_COLUMN] = dataset.labels.astype(int)
    frame.to_csv(path, index=False)
    logger.debug(f"Wrote {len(dataset)} rows to {path}")
    return path


def normalize(dataset: Dataset, bounds: Optional[NormalizationBounds] = None) -> Dataset:
    """Scale features to [0, 1] with `bounds`, fitting them on `dataset` when absent."""
    if bounds is None:
        bounds = NormalizationBounds.fit(dataset.features)
    if bounds.lows.size != dataset.n_features:
        raise InvalidArgumentError(
            f"Bounds cover {bounds.lows.size} features, dataset has {dataset.n_features}"
        )
    return replace(dataset, features=bounds.apply(dataset.features), bounds=bounds)


def denormalize(dataset: Dataset, bounds: Optional[NormalizationBounds] = None) -> Dataset:
    bounds = bounds or dataset.bounds
    if bounds is None:
        raise InvalidArgumentError("Dataset carries no normalization bounds")
    return replace(dataset, features=bounds.invert(dataset.features), bounds=None)


def select_features(dataset: Dataset, indices: Sequence[int]) -> Dataset:
    indices = [int(i) for i in indices]
    if len(set(indices)) != len(indices):
        raise InvalidArgumentError(f"Duplicate feature indices: {indices}")
    out_of_range = [i for i in indices if not 0 <= i < dataset.n_features]
    if out_of_range:
        raise InvalidArgumentError(
            f"Feature indices {out_of_range} out of range for {dataset.n_features} features"
        )
    bounds = dataset.bounds
    if bounds is not None:
        bounds = NormalizationBounds(bounds.lows[indices], bounds.highs[indices])
    return Dataset(
        dataset.features[:, indices],
        dataset.labels,
        [dataset.feature_names[i] for i in indices],
        bounds,
    )


def _test_counts(n_fraud: int, n_normal: int, fraction: float, cap: Optional[int]):
    n_test_fraud = n_fraud
    n_test_normal = int(round(n_test_fraud * (1 - fraction) / fraction))
    if n_test_normal > n_normal:
        n_test_fraud = int(np.floor(n_normal * fraction / (1 - fraction)))
        n_test_normal = int(round(n_test_fraud * (1 - fraction) / fraction))
    if cap is not None and n_test_fraud + n_test_normal > cap:
        n_test_fraud = int(round(cap * fraction))
        n_test_normal = cap - n_test_fraud
    return n_test_fraud, n_test_normal


def make_splits(dataset: Dataset, plan: SplitSpec) -> Splits:
    """Non-fraud training rows, a balanced calibration set and a resampled test set.

    Calibration takes `calibration_fraction` of the frauds and as many
    non-frauds; the remaining frauds go to a test set padded with non-frauds
    to `test_fraud_fraction`. No row appears in two splits.
    """
    seed = plan.seed if plan.seed is not None else 0
    rng = make_rng(seed, RngPurpose.SPLIT)
    frauds = rng.permutation(np.flatnonzero(dataset.labels))
    normals = rng.permutation(np.flatnonzero(~dataset.labels))
    if frauds.size < 2:
        raise InvalidArgumentError(f"Need at least 2 fraud rows to split, found {frauds.size}")

    n_train = int(np.floor(plan.train_fraction * normals.size))
    if plan.max_train_rows is not None:
        n_train = min(n_train, plan.max_train_rows)
    if n_train < 1:
        raise InvalidArgumentError("Training split would be empty")
    train_idx, rest = normals[:n_train], normals[n_train:]

    n_cal = min(max(1, int(round(plan.calibration_fraction * frauds.size))), frauds.size - 1)
    if rest.size < n_cal + 1:
        raise InvalidArgumentError(
            f"Only {rest.size} non-fraud rows left for calibration and test, need more than {n_cal}"
        )
    cal_idx = rng.permutation(np.concatenate([frauds[:n_cal], rest[:n_cal]]))

    test_frauds, test_normals = frauds[n_cal:], rest[n_cal:]
    n_test_fraud, n_test_normal = _test_counts(
        test_frauds.size, test_normals.size, plan.test_fraud_fraction, plan.max_test_rows
    )
    if n_test_fraud < 1 or n_test_normal < 1:
        raise InvalidArgumentError(
            f"Insufficient rows for a test set with fraud fraction {plan.test_fraud_fraction}"
        )
    test_idx = rng.permutation(
        np.concatenate([test_frauds[:n_test_fraud], test_normals[:n_test_normal]])
    )

    splits = Splits(dataset.take(train_idx), dataset.take(cal_idx), dataset.take(test_idx))
    logger.info(
        f"Splits: train {len(splits.train)}, calibration {len(splits.calibration)} "
        f"({splits.calibration.n_fraud} fraud), "
        f"test {len(splits.test)} ({splits.test.n_fraud} fraud)"
    )
    return splits


def normalize_splits(splits: Splits) -> Splits:
    """Fit bounds on the training split and apply them to every split."""
    bounds = NormalizationBounds.fit(splits.train.features)
    return Splits(
        normalize(splits.train, bounds),
        normalize(splits.calibration, bounds),
        normalize(splits.test, bounds),
    )


def synth_dataset(
    n_normal: int,
    n_anomalous: int,
    dim: int,
    seed: int,
    mean: float = 0.5,
    std: float = 0.08,
    correlation: float = 0.5,
) -> Dataset:
    """Correlated Gaussian normals clipped into [0, 1]; anomalies uniform on [0, 1]^dim."""
    if dim < 1:
        raise InvalidArgumentError(f"Synthetic data needs dim >= 1, got {dim}")
    if n_normal < 0 or n_anomalous < 0:
        raise InvalidArgumentError("Row counts must be non-negative")
    rng = make_rng(seed, RngPurpose.SYNTH)
    cov = std ** 2 * ((1 - correlation) * np.eye(dim) + correlation * np.ones((dim, dim)))
    normal = np.clip(rng.multivariate_normal(np.full(dim, mean), cov, size=n_normal), 0.0, 1.0)
    anomalous = rng.uniform(0.0, 1.0, size=(n_anomalous, dim))
    features = np.concatenate([normal.reshape(n_normal, dim), anomalous], axis=0)
    labels = np.concatenate([np.zeros(n_normal, dtype=bool), np.ones(n_anomalous, dtype=bool)])
    order = rng.permutation(labels.size)
    return Dataset(features[order], labels[order], feature_columns(dim))


def synth_from_config(config: SynthConfig) -> Dataset:
    return synth_dataset(
        config.n_normal,
        config.n_anomalous,
        config.dim,
        config.seed if config.seed is not None else 0,
        mean=config.mean,
        std=config.std,
        correlation=config.correlation,
    )
