"""Checkpoint directories: one .qnn file per network plus model.yaml.

model.yaml records what the networks cannot: the generator variant, the
circuit shape with its bases and angles, the seed the circuit was built
from, the training-data normalization bounds and the run configuration.
Adam moments are not stored; a resumed model starts with fresh optimizers.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import yaml

from ..config import RunConfig, TrainConfig, config_from_dict, config_to_dict
from ..data import NormalizationBounds
from ..enums import CircuitKind, GeneratorVariant
from ..exceptions import CheckpointError, ConfigError
from ..nn import load_network, save_network
from ..qsim import build_ansatz
from .generators import ClassicalGenerator, QuantumGenerator
from .model import GanModel

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
MODEL_FILE = "model.yaml"
CRITIC_FILE = "critic.qnn"
UPSCALING_FILE = "upscaling.qnn"
BODY_FILE = "body.qnn"


@dataclass
class Checkpoint:
    model: GanModel
    config: Optional[RunConfig] = None
    bounds: Optional[NormalizationBounds] = None


def save_checkpoint(
    model: GanModel,
    directory: Union[str, Path],
    config: Optional[RunConfig] = None,
    bounds: Optional[NormalizationBounds] = None,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    generator = model.generator

    meta: Dict[str, Any] = {
        "format_version": CHECKPOINT_VERSION,
        "variant": model.variant.name,
        "seed": int(model.seed),
        "latent_dim": int(model.latent_dim),
        "data_dim": int(model.data_dim),
        "critic_steps": int(model.critic_steps),
        "generator_steps": int(model.generator_steps),
    }
    save_network(model.critic, directory / CRITIC_FILE)
    if generator.upscaling is not None:
        save_network(generator.upscaling, directory / UPSCALING_FILE)
    if isinstance(generator, QuantumGenerator):
        meta["quantum"] = {
            "circuit_kind": generator.layout.circuit_kind.name,
            "depth": int(generator.layout.depth),
            "identity_blocks": bool(generator.layout.identity_blocks),
            "bases": generator.bases.names(),
            "theta": [float(t) for t in generator.theta],
            "rescale_expectations": bool(generator.rescale_expectations),
        }
    elif generator.body is not None:
        save_network(generator.body, directory / BODY_FILE)
    if bounds is not None:
        meta["normalization"] = {
            "lows": [float(v) for v in bounds.lows],
            "highs": [float(v) for v in bounds.highs],
        }
    if config is not None:
        meta["config"] = config_to_dict(config)

    with open(directory / MODEL_FILE, "w") as f:
        yaml.safe_dump(meta, f, sort_keys=False)
    logger.debug(f"Saved checkpoint to {directory}")
    return directory


def _load_quantum(meta: Dict[str, Any], upscaling) -> QuantumGenerator:
    stored = meta["quantum"]
    layout, bases = build_ansatz(
        CircuitKind[stored["circuit_kind"]],
        int(meta["latent_dim"]),
        int(stored["depth"]),
        int(meta["seed"]),
        identity_blocks=bool(stored.get("identity_blocks", False)),
    )
    if bases.names() != list(stored["bases"]):
        raise CheckpointError("Stored rotation bases differ from those rebuilt from the seed")
    return QuantumGenerator(
        layout,
        bases,
        np.asarray(stored["theta"], dtype=np.float64),
        upscaling,
        bool(stored.get("rescale_expectations", False)),
    )


def load_checkpoint(directory: Union[str, Path]) -> Checkpoint:
    directory = Path(directory)
    meta_path = directory / MODEL_FILE
    if not meta_path.exists():
        raise CheckpointError(f"No {MODEL_FILE} in checkpoint directory {directory}")
    with open(meta_path) as f:
        meta = yaml.safe_load(f)
    if not isinstance(meta, dict) or meta.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint metadata in {meta_path}")

    try:
        config = config_from_dict(meta["config"]) if meta.get("config") else None
    except ConfigError as e:
        raise CheckpointError(f"Stored run configuration is invalid: {e}") from e

    critic = load_network(directory / CRITIC_FILE)
    upscaling = None
    if (directory / UPSCALING_FILE).exists():
        upscaling = load_network(directory / UPSCALING_FILE)

    try:
        variant = GeneratorVariant[meta["variant"]]
        if variant == GeneratorVariant.QUANTUM:
            generator = _load_quantum(meta, upscaling)
        else:
            body = load_network(directory / BODY_FILE) if (directory / BODY_FILE).exists() else None
            generator = ClassicalGenerator(int(meta["latent_dim"]), body, upscaling)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Malformed checkpoint metadata in {meta_path}: {e}") from e

    train_config = config.train if config is not None else TrainConfig()
    model = GanModel(generator, critic, train_config, int(meta["seed"]))
    model.critic_steps = int(meta.get("critic_steps", 0))
    model.generator_steps = int(meta.get("generator_steps", 0))

    bounds = None
    if meta.get("normalization"):
        bounds = NormalizationBounds(
            np.asarray(meta["normalization"]["lows"], dtype=np.float64),
            np.asarray(meta["normalization"]["highs"], dtype=np.float64),
        )
    logger.info(f"Loaded {variant.name} checkpoint from {directory}")
    return Checkpoint(model, config, bounds)
