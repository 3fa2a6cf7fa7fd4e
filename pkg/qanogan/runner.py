"""ExperimentRunner: config, data, training, calibration and evaluation wired into runs."""
import copy
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .anogan import AnomalyScorer, CalibrationResult, ScoredSample, calibrate_threshold
from .config import AnomalyConfig, ConfigLoader, RunConfig, config_from_dict, config_to_dict
from .data import (
    Dataset,
    NormalizationBounds,
    Splits,
    load_csv,
    make_splits,
    normalize,
    select_features,
    synth_from_config,
    write_csv,
)
from .evaluation import EvaluationResult, evaluate_predictions, evaluate_run
from .exceptions import ConfigError, InvalidArgumentError, QAnoGANError
from .gan import GanModel, Trainer, TrainingHistory, load_checkpoint, save_checkpoint
from .managers import ArtifactManager, ResourceMonitor, read_yaml
from .managers.artifact_manager import (
    EFFECTIVE_CONFIG_FILE,
    LOSS_HISTORY_FILE,
    METRICS_FILE,
    SCORES_FILE,
    SUMMARY_FILE,
    THRESHOLD_FILE,
)
from .metrics import bootstrap_ci

PathLike = Union[str, Path]
SYNTH_FILE = "synthetic.csv"
METRIC_COLUMNS = [
    "run_id", "seed", "iterations", "threshold", "precision", "recall", "f1", "ci_low", "ci_high",
]


@dataclass
class TrainOutcome:
    model: GanModel
    history: TrainingHistory
    splits: Splits
    bounds: NormalizationBounds
    run_dir: Path


def prepare_features(dataset: Dataset, bounds: NormalizationBounds, config: RunConfig) -> Dataset:
    """Scale raw rows with training bounds, then keep the configured features."""
    scaled = normalize(dataset, bounds)
    if config.data.feature_indices is not None:
        scaled = select_features(scaled, config.data.feature_indices)
    return scaled


def _scores_frame(samples: Sequence[ScoredSample]) -> pd.DataFrame:
    return evaluate_predictions(list(samples)).scores_frame()


class ExperimentRunner:
    """Runs the qanogan commands against one output directory."""

    def __init__(self, output_dir: Optional[PathLike] = None):
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.loader = ConfigLoader()
        self.logger = logging.getLogger(__name__)

    def _artifacts(
        self, config: Optional[RunConfig] = None, name: Optional[str] = None
    ) -> ArtifactManager:
        if self.output_dir is not None:
            root = self.output_dir
        elif config is not None:
            root = Path(config.output_dir) / (name or config.name)
        else:
            raise InvalidArgumentError("No output directory given")
        return ArtifactManager(root)

    def execute(self, action: Callable[[], Any]) -> int:
        """Run one command and return its exit code."""
        try:
            action()
            return 0
        except KeyboardInterrupt:
            self.logger.warning("Interrupted")
            return 130
        except ConfigError as e:
            self.logger.error(f"Invalid configuration: {e}")
            return 2
        except (QAnoGANError, OSError) as e:
            self.logger.error(f"Command failed: {e}")
            self.logger.debug("Traceback", exc_info=True)
            return 1

    def load_config(
        self,
        path: Optional[PathLike],
        overrides: Sequence[str] = (),
        seed: Optional[int] = None,
    ) -> RunConfig:
        config = self.loader.read(path, overrides)
        if seed is not None:
            config.reseed(seed)
        return config

    # data

    def load_dataset(self, config: RunConfig) -> Dataset:
        if config.data.path is not None:
            return load_csv(config.data.path, config.data.n_features)
        if config.synth is not None:
            return synth_from_config(config.synth)
        raise ConfigError("Either data.path or a synth section is required", ["data.path"])

    def prepare_splits(self, config: RunConfig, artifacts: Optional[ArtifactManager] = None):
        """Raw splits written next to the outputs; the model sees scaled, selected features."""
        raw = make_splits(self.load_dataset(config), config.split)
        if artifacts is not None:
            for name in ("train", "calibration", "test"):
                write_csv(getattr(raw, name), artifacts.splits_dir / f"{name}.csv")
        bounds = NormalizationBounds.fit(raw.train.features)
        splits = Splits(
            prepare_features(raw.train, bounds, config),
            prepare_features(raw.calibration, bounds, config),
            prepare_features(raw.test, bounds, config),
        )
        return splits, bounds

    # commands

    def cmd_synth(self, config: RunConfig) -> Path:
        if config.synth is None:
            raise ConfigError("The synth command needs a synth section", ["synth"])
        artifacts = self._artifacts(config)
        dataset = synth_from_config(config.synth)
        path = write_csv(dataset, artifacts.setup() / SYNTH_FILE)
        self.loader.write(config, artifacts.path(EFFECTIVE_CONFIG_FILE))
        self.logger.info(
            f"Wrote {len(dataset)} synthetic rows ({dataset.n_fraud} anomalous) to {path}"
        )
        return path

    def cmd_train(
        self, config: RunConfig, artifacts: Optional[ArtifactManager] = None
    ) -> TrainOutcome:
        artifacts = artifacts or self._artifacts(config)
        artifacts.setup()
        monitor = ResourceMonitor()
        monitor.start()
        self.loader.write(config, artifacts.path(EFFECTIVE_CONFIG_FILE))

        splits, bounds = self.prepare_splits(config, artifacts)
        model = GanModel.build(config.generator, config.critic, config.train, config.train.seed)
        trainer = Trainer(model, config.train)
        history = trainer.train(
            splits.train,
            checkpoint_dir=artifacts.root / "checkpoints",
            run_config=config,
            bounds=bounds,
        )

        save_checkpoint(model, artifacts.checkpoint_dir, config, bounds)
        history.save(artifacts.path(LOSS_HISTORY_FILE))
        artifacts.write_yaml(
            {
                "command": "train",
                "seed": config.seed,
                "generator_iterations": model.generator_steps,
                "critic_iterations": model.critic_steps,
                "resources": monitor.stop(),
            },
            SUMMARY_FILE,
        )
        return TrainOutcome(model, history, splits, bounds, artifacts.root)

    def _anomaly_config(self, config: Optional[RunConfig], seed: Optional[int]) -> AnomalyConfig:
        anomaly = copy.deepcopy(config.anomaly) if config is not None else AnomalyConfig()
        if seed is not None:
            anomaly.seed = seed
        return anomaly

    def calibrate(
        self, model: GanModel, dataset: Dataset, anomaly: AnomalyConfig, progress: bool = False
    ) -> Tuple[CalibrationResult, List[ScoredSample]]:
        scorer = AnomalyScorer(model, anomaly, progress=progress)
        samples = scorer.score_batch(dataset.features, labels=dataset.labels)
        result = calibrate_threshold([s.score for s in samples], dataset.labels)
        for s in samples:
            s.predicted_label = s.score >= result.threshold
        self.logger.info(f"Calibrated threshold {result.threshold:.6f} with F1 {result.f1:.4f}")
        return result, samples

    def _load_rows(self, path: PathLike, config: RunConfig, bounds) -> Dataset:
        dataset = load_csv(path, config.data.n_features)
        if bounds is None:
            raise InvalidArgumentError("Checkpoint carries no normalization bounds")
        return prepare_features(dataset, bounds, config)

    def cmd_calibrate(
        self, checkpoint_dir: PathLike, data_path: PathLike, seed: Optional[int] = None
    ) -> CalibrationResult:
        checkpoint = load_checkpoint(checkpoint_dir)
        config = checkpoint.config or RunConfig()
        dataset = self._load_rows(data_path, config, checkpoint.bounds)
        anomaly = self._anomaly_config(checkpoint.config, seed)
        result, samples = self.calibrate(checkpoint.model, dataset, anomaly, config.train.progress)

        artifacts = self._artifacts_near(checkpoint_dir)
        artifacts.write_frame(_scores_frame(samples), "calibration_scores.csv")
        artifacts.write_yaml(
            {
                "threshold": result.threshold,
                "f1": result.f1,
                "rows": len(dataset),
                "anomalous_rows": dataset.n_fraud,
                "seed": anomaly.seed,
                "checkpoint": str(checkpoint_dir),
            },
            THRESHOLD_FILE,
        )
        return result

    def _artifacts_near(self, checkpoint_dir: PathLike) -> ArtifactManager:
        if self.output_dir is not None:
            return ArtifactManager(self.output_dir)
        return ArtifactManager(Path(checkpoint_dir).parent)

    def cmd_evaluate(
        self,
        checkpoint_dirs: Sequence[PathLike],
        threshold_files: Sequence[PathLike],
        data_path: PathLike,
        seed: Optional[int] = None,
    ) -> pd.DataFrame:
        if len(checkpoint_dirs) != len(threshold_files):
            raise InvalidArgumentError(
                f"{len(checkpoint_dirs)} checkpoints but {len(threshold_files)} threshold files"
            )
        if not checkpoint_dirs:
            raise InvalidArgumentError("Nothing to evaluate")
        artifacts = self._artifacts_near(checkpoint_dirs[0])
        rows = []
        pairs = zip(checkpoint_dirs, threshold_files)
        for run_id, (checkpoint_dir, threshold_file) in enumerate(pairs):
            checkpoint = load_checkpoint(checkpoint_dir)
            config = checkpoint.config or RunConfig()
            threshold = float(read_yaml(threshold_file)["threshold"])
            dataset = self._load_rows(data_path, config, checkpoint.bounds)
            anomaly = self._anomaly_config(checkpoint.config, seed)
            result = evaluate_run(
                checkpoint.model, dataset, threshold, anomaly, config.train.progress
            )
            name = SCORES_FILE if len(checkpoint_dirs) == 1 else f"scores_{run_id}.csv"
            artifacts.write_frame(result.scores_frame(), name)
            rows.append(self._metrics_row(run_id, config.seed, checkpoint.model, threshold, result))
        metrics = self._with_intervals(rows)
        artifacts.write_frame(metrics, METRICS_FILE)
        return metrics

    def cmd_score(
        self,
        checkpoint_dir: PathLike,
        threshold_file: PathLike,
        row: str,
        seed: Optional[int] = None,
    ) -> ScoredSample:
        checkpoint = load_checkpoint(checkpoint_dir)
        config = checkpoint.config or RunConfig()
        try:
            values = np.array([float(v) for v in row.split(",")], dtype=np.float64)
        except ValueError as e:
            raise InvalidArgumentError(f"Row must be comma-separated numbers: {e}") from e
        if values.size != config.data.n_features:
            raise InvalidArgumentError(
                f"Row has {values.size} values, model expects {config.data.n_features}"
            )
        if checkpoint.bounds is None:
            raise InvalidArgumentError("Checkpoint carries no normalization bounds")
        row_set = Dataset(values[None, :], [False])
        x = prepare_features(row_set, checkpoint.bounds, config).features[0]
        threshold = float(read_yaml(threshold_file)["threshold"])
        scorer = AnomalyScorer(checkpoint.model, self._anomaly_config(checkpoint.config, seed))
        return scorer.classify(x, threshold)

    def run_pipeline(self, config: RunConfig, artifacts: ArtifactManager) -> Dict[str, Any]:
        """Train, calibrate on the calibration split and evaluate on the test split."""
        outcome = self.cmd_train(config, artifacts)
        anomaly = self._anomaly_config(config, None)
        calibration, samples = self.calibrate(
            outcome.model, outcome.splits.calibration, anomaly, config.train.progress
        )
        artifacts.write_frame(_scores_frame(samples), "calibration_scores.csv")
        artifacts.write_yaml(
            {"threshold": calibration.threshold, "f1": calibration.f1, "seed": anomaly.seed},
            THRESHOLD_FILE,
        )
        threshold = calibration.threshold
        result = evaluate_run(
            outcome.model, outcome.splits.test, threshold, anomaly, config.train.progress
        )
        artifacts.write_frame(result.scores_frame(), SCORES_FILE)
        return self._metrics_row(config.name, config.seed, outcome.model, threshold, result)

    def cmd_run(self, config: RunConfig, repeat: int = 1, jobs: int = 1) -> pd.DataFrame:
        if repeat < 1 or jobs < 1:
            raise InvalidArgumentError(f"repeat and jobs must be >= 1, got {repeat} and {jobs}")
        artifacts = self._artifacts(config)
        seeds = [config.seed + k for k in range(repeat)]
        if repeat == 1:
            rows = [self.run_pipeline(config, artifacts)]
        else:
            tasks = [
                (config_to_dict(config), seed, str(artifacts.root / f"seed_{seed}"))
                for seed in seeds
            ]
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    rows = list(pool.map(_run_seed, tasks))
            else:
                rows = [_run_seed(task) for task in tasks]
        metrics = self._with_intervals(rows)
        artifacts.write_frame(metrics, METRICS_FILE)
        return metrics

    @staticmethod
    def _metrics_row(run_id, seed, model: GanModel, threshold: float, result: EvaluationResult):
        return {
            "run_id": run_id,
            "seed": seed,
            "iterations": model.generator_steps,
            "threshold": threshold,
            "precision": result.precision,
            "recall": result.recall,
            "f1": result.f1,
        }

    def _with_intervals(self, rows: List[Dict[str, Any]]) -> pd.DataFrame:
        frame = pd.DataFrame(rows)
        interval = bootstrap_ci(frame["f1"].to_numpy(), seed=int(frame["seed"].iloc[0]))
        frame["ci_low"] = interval.low
        frame["ci_high"] = interval.high
        self.logger.info(
            f"F1 over {len(frame)} run(s): mean {interval.mean:.4f}, "
            f"95% CI [{interval.low:.4f}, {interval.high:.4f}]"
        )
        return frame[METRIC_COLUMNS]


def _run_seed(task: Tuple[Dict[str, Any], int, str]) -> Dict[str, Any]:
    """One `run` repetition; module-level so worker processes can unpickle it."""
    config_dict, seed, root = task
    config = config_from_dict(config_dict)
    config.reseed(seed)
    config.name = f"{config.name}_seed_{seed}"
    return ExperimentRunner(root).run_pipeline(config, ArtifactManager(root))
