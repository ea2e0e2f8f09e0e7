"""Deterministic, keyed random streams.

Every random draw in the toolkit comes from an RngStream derived from
(master_seed, phase, epoch, item_index) via SHA-256. The derivation is a pure
function, so any item can be regenerated in isolation and parallel workers
never contend over generator state. The 128-bit digest prefix seeds a PCG64
generator; distinct keys collide only with cryptographically negligible
probability.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

# Batch-item streams pack (batch_index, position) into one item_index; the
# low 20 bits hold the position, so batches are capped at 2**20 samples.
ITEM_BITS = 20


class RngStream:
    """A keyed generator plus the key it was derived from."""

    def __init__(self, master_seed: int, phase: str, epoch: int, item_index: int) -> None:
        self.master_seed = int(master_seed)
        self.stream_key = (phase, int(epoch), int(item_index))
        material = f"{self.master_seed}|{phase}|{int(epoch)}|{int(item_index)}".encode()
        digest = hashlib.sha256(material).digest()
        self._gen = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:16], "little")))

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return float(self._gen.uniform(low, high))

    def uniform_field(self, low: float, high: float, shape: tuple[int, ...]) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def normal_field(self, loc: float, scale: float, shape: tuple[int, ...]) -> np.ndarray:
        if scale == 0.0:
            return np.full(shape, float(loc))
        return self._gen.normal(loc, scale, size=shape)

    def integer(self, low: int, high: int) -> int:
        """One integer drawn uniformly from [low, high)."""
        return int(self._gen.integers(low, high))

    def choice(self, options: Sequence):
        return options[self.integer(0, len(options))]

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def derive_stream(master_seed: int, phase: str, epoch: int, item_index: int) -> RngStream:
    """Pure keyed derivation; equal keys yield identical draw sequences."""
    return RngStream(master_seed, phase, epoch, item_index)


def item_stream(master_seed: int, phase: str, epoch: int, batch_index: int, position: int) -> RngStream:
    """Stream for one sample inside one batch."""
    if not 0 <= position < (1 << ITEM_BITS):
        raise ValueError(f"batch position {position} out of range (max {1 << ITEM_BITS})")
    return derive_stream(master_seed, phase, epoch, (batch_index << ITEM_BITS) | position)
