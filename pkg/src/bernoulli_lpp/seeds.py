"""Seed streams keyed by (master seed, purpose, trial index).

Every random draw in the package goes through :func:`make_rng`, so a draw
depends only on its label and index, never on execution order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SeedSpec", "make_rng", "as_seed"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    label: str = "default"
    index: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.master_seed, (int, np.integer)):
            raise TypeError("master_seed must be an integer")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        idx = self.index
        if isinstance(idx, (int, np.integer)):
            idx = (int(idx),)
        object.__setattr__(self, "index", tuple(int(i) for i in idx))
        if any(i < 0 for i in self.index):
            raise ValueError("trial indices must be nonnegative")

    def child(self, label: str | None = None, *index: int) -> "SeedSpec":
        """Sub-stream: same master seed, ``label`` nested under this one, index appended."""
        name = f"{self.label}/{label}" if label else self.label
        return SeedSpec(self.master_seed, name, self.index + tuple(index))

    def sequence(self) -> np.random.SeedSequence:
        key = (zlib.crc32(self.label.encode("utf-8")),) + self.index
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)


def as_seed(seed, label: str = "default") -> SeedSpec:
    """Accept a SeedSpec or a bare integer."""
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        raise ValueError("a seed is required; randomness is never drawn from the OS")
    return SeedSpec(int(seed), label)


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(as_seed(seed).sequence()))
