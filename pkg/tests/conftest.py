from pathlib import Path

import numpy as np
import pytest
import yaml

from qanogan.config import ConfigLoader, RunConfig, config_from_dict
from qanogan.enums import Activation
from qanogan.nn import DenseLayer, DenseNetwork


def tiny_run_dict(variant: str = "QUANTUM") -> dict:
    """A run that trains and scores in well under a second."""
    generator = {"variant": variant, "latent_dim": 3, "data_dim": 3}
    if variant == "QUANTUM":
        generator["ansatz"] = {"circuit_kind": "C1", "depth": 1}
    return {
        "name": "tiny",
        "seed": 7,
        "generator": generator,
        "critic": {"hidden": [4]},
        "train": {
            "learning_rate": 0.01,
            "batch_size": 16,
            "n_critic": 2,
            "total_generator_iters": 3,
            "log_every": 1,
            "progress": False,
        },
        "anomaly": {"latent_iters": 5, "learning_rate": 0.05, "batch_size": 64},
        "split": {"max_test_rows": 40},
        "data": {"n_features": 3},
        "synth": {"n_normal": 120, "n_anomalous": 24, "dim": 3},
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> RunConfig:
    return config_from_dict(tiny_run_dict())


@pytest.fixture
def config_file(tmp_path):
    """Writes a run dict to YAML and returns its path."""

    def write(data: dict, name: str = "run.yaml") -> Path:
        path = tmp_path / name
        with open(path, "w") as f:
            yaml.safe_dump(data, f, sort_keys=False)
        return path

    return write


@pytest.fixture
def loader():
    return ConfigLoader()


def linear_critic(weights, bias: float = 0.0) -> DenseNetwork:
    """D(x) = <weights, x> + bias."""
    weights = np.asarray(weights, dtype=np.float64).reshape(1, -1)
    return DenseNetwork([DenseLayer(weights, [bias], Activation.IDENTITY)])


def constant_critic(dim: int, value: float) -> DenseNetwork:
    return linear_critic(np.zeros(dim), value)


def random_network(rng, dims, hidden: Activation, last: Activation = Activation.IDENTITY):
    activations = [hidden] * (len(dims) - 2) + [last]
    net = DenseNetwork.build(dims, activations, rng)
    # non-zero biases so the bias gradients are exercised
    net.set_flat_parameters(net.flat_parameters() + rng.normal(0, 0.1, net.n_params))
    return net
