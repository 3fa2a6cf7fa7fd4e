"""Versioned flat-file serialization of a DenseNetwork.

Layout, all little-endian:
    4 bytes   magic b"QNNW"
    uint32    format version
    uint32    number of layers L
    uint32    L + 1 layer dimensions (input first)
    uint8     L activation tags
    float64   per layer: weights row-major (out x in), then bias
"""
import logging
import struct
from pathlib import Path
from typing import Dict, Union

import numpy as np

from ..enums import Activation
from ..exceptions import CheckpointError
from .dense import DenseLayer, DenseNetwork

logger = logging.getLogger(__name__)

MAGIC = b"QNNW"
FORMAT_VERSION = 1
FLOAT_DTYPE = np.dtype("<f8")

ACTIVATION_TAGS: Dict[Activation, int] = {
    Activation.IDENTITY: 0,
    Activation.LEAKY_RELU: 1,
    Activation.SIGMOID: 2,
}
TAG_ACTIVATIONS = {tag: activation for activation, tag in ACTIVATION_TAGS.items()}


def network_to_bytes(net: DenseNetwork) -> bytes:
    n_layers = len(net.layers)
    header = MAGIC + struct.pack("<II", FORMAT_VERSION, n_layers)
    header += struct.pack(f"<{n_layers + 1}I", *net.dims)
    header += struct.pack(f"<{n_layers}B", *(ACTIVATION_TAGS[a] for a in net.activations))
    return header + net.flat_parameters().astype(FLOAT_DTYPE).tobytes()


def network_from_bytes(blob: bytes) -> DenseNetwork:
    try:
        if blob[:4] != MAGIC:
            raise CheckpointError("Not a network checkpoint (bad magic)")
        version, n_layers = struct.unpack_from("<II", blob, 4)
        if version != FORMAT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint format version {version}")
        offset = 12
        dims = struct.unpack_from(f"<{n_layers + 1}I", blob, offset)
        offset += 4 * (n_layers + 1)
        tags = struct.unpack_from(f"<{n_layers}B", blob, offset)
        offset += n_layers
        values = np.frombuffer(blob, dtype=FLOAT_DTYPE, offset=offset).astype(np.float64)
    except struct.error as e:
        raise CheckpointError(f"Truncated checkpoint header: {e}") from e
    except ValueError as e:
        raise CheckpointError(f"Malformed checkpoint payload: {e}") from e

    layers = []
    cursor = 0
    for in_dim, out_dim, tag in zip(dims[:-1], dims[1:], tags):
        if tag not in TAG_ACTIVATIONS:
            raise CheckpointError(f"Unknown activation tag {tag}")
        size = in_dim * out_dim
        if cursor + size + out_dim > values.size:
            raise CheckpointError("Checkpoint payload is shorter than its header declares")
        weights = values[cursor:cursor + size].reshape(out_dim, in_dim)
        cursor += size
        bias = values[cursor:cursor + out_dim]
        cursor += out_dim
        layers.append(DenseLayer(weights, bias, TAG_ACTIVATIONS[tag]))
    if cursor != values.size:
        raise CheckpointError(f"{values.size - cursor} trailing values in checkpoint")
    return DenseNetwork(layers)


def save_network(net: DenseNetwork, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(network_to_bytes(net))
    logger.debug(f"Saved network {net!r} to {path}")
    return path


def load_network(path: Union[str, Path]) -> DenseNetwork:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Network checkpoint not found: {path}")
    return network_from_bytes(path.read_bytes())
