"""Run output directories and the files written into them."""
import logging
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd
import yaml

from ..exceptions import QAnoGANError

CHECKPOINT_DIR = "checkpoint"
SPLITS_DIR = "splits"
LOSS_HISTORY_FILE = "loss_history.csv"
EFFECTIVE_CONFIG_FILE = "effective_config.yaml"
THRESHOLD_FILE = "threshold.yaml"
SCORES_FILE = "scores.csv"
METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.yaml"


class ArtifactManager:
    """Owns one run directory; every writer creates parents as needed."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.logger = logging.getLogger(__name__)

    def setup(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        self.logger.debug(f"Using output directory: {self.root}")
        return self.root

    def path(self, name: str) -> Path:
        return self.root / name

    @property
    def checkpoint_dir(self) -> Path:
        return self.root / CHECKPOINT_DIR

    @property
    def splits_dir(self) -> Path:
        return self.root / SPLITS_DIR

    def write_frame(self, frame: pd.DataFrame, name: str) -> Path:
        path = self.setup() / name
        frame.to_csv(path, index=False)
        self.logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_yaml(self, data: Dict[str, Any], name: str) -> Path:
        path = self.setup() / name
        with open(path, "w") as f:
            yaml.safe_dump(data, f, sort_keys=False)
        self.logger.debug(f"Wrote {path}")
        return path


def read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    with open(path) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise QAnoGANError(f"Expected a mapping in {path}")
    return data
