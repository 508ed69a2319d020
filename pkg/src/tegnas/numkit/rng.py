"""Seeded, splittable random number generation.

Built on numpy's counter-based Philox generator. An Rng is identified by
(seed, path): `child(k)` derives an independent stream at path + (k,), a
pure function of the identifiers, so parallel work can split streams ahead
of a fan-out and get results that do not depend on scheduling or thread
count. Draws on a single Rng are sequential and owned by one task.
"""
from __future__ import annotations

import numpy as np

from ..errors import ZeroFanIn


class Rng:
    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple = ()):
        if seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = int(seed)
        self.path = tuple(int(k) for k in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def child(self, *keys: int) -> "Rng":
        """Derived independent stream; depends only on (seed, path, keys)."""
        return Rng(self.seed, self.path + keys)

    # -- draws (stateful, sequence-deterministic given the identifiers) --

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None) -> np.ndarray:
        return self._gen.normal(loc, scale, size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n)."""
        if k > n:
            raise ValueError(f"cannot draw {k} distinct items from {n}")
        return self._gen.choice(n, size=k, replace=False)

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={self.path})"


def kaiming_normal(rng: Rng, fan_in: int, shape: tuple) -> np.ndarray:
    """Weights ~ N(0, 2/fan_in), the init the indicator statistics assume."""
    if fan_in <= 0:
        raise ZeroFanIn(f"fan_in must be positive, got {fan_in}")
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), shape)
