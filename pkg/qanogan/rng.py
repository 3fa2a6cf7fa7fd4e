"""Seed splitting: one root seed, one independent generator per purpose."""
from typing import Dict, Tuple

import numpy as np

from .enums import RngPurpose


def make_rng(seed: int, purpose: RngPurpose, *keys: int) -> np.random.Generator:
    """Generator for `purpose`, optionally sub-keyed (e.g. by row index)."""
    spawn_key: Tuple[int, ...] = (purpose.value,) + tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))


class RngStreams:
    """Lazily created, cached streams derived from a single root seed.

    Each purpose draws from its own stream, so changing how often one
    consumer draws never shifts the numbers another consumer sees.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: Dict[RngPurpose, np.random.Generator] = {}

    def __getitem__(self, purpose: RngPurpose) -> np.random.Generator:
        if purpose not in self._streams:
            self._streams[purpose] = make_rng(self.seed, purpose)
        return self._streams[purpose]
