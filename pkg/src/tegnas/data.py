"""Synthetic desk-scale image data.

Ten classes of 8x8x3 "blob" images. A class is a Gaussian bump at a
class-specific location with a class-specific channel mix (class 9 is a
two-bump pattern so all ten are distinct). Channel statistics alone
separate only the three mix groups, so affine nets plateau well below
conv nets; bump location carries the rest of the signal. Pools are built
once per (config, seed) and are bit-deterministic.

Batch draws are permutation prefixes: asking for a larger batch from the
same stream extends the smaller one, which keeps monotone-sampling
properties testable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import Rng


@dataclass(frozen=True)
class DataConfig:
    kind: str = "blobs"
    n_train: int = 512
    n_test: int = 512
    classes: int = 10
    channels: int = 3
    size: int = 8
    noise: float = 0.25
    seed: int = 0


_MIXES = np.array([[1.0, 0.55, 0.15], [0.15, 1.0, 0.55], [0.55, 0.15, 1.0]])


class BlobDataset:
    def __init__(self, cfg: DataConfig = DataConfig()):
        if cfg.kind != "blobs":
            raise ValueError(f"unknown dataset kind {cfg.kind!r}")
        self.cfg = cfg
        rng = Rng(cfg.seed, path=(601,))
        self.x_train, self.y_train = self._pool(cfg.n_train, rng.child(0))
        self.x_test, self.y_test = self._pool(cfg.n_test, rng.child(1))

    def _centers(self):
        s = self.cfg.size
        lo, mid, hi = 0.2 * (s - 1), 0.5 * (s - 1), 0.8 * (s - 1)
        grid = [(r, c) for r in (lo, mid, hi) for c in (lo, mid, hi)]
        return grid  # 9 single-bump locations; class 9 uses two corners

    def _pool(self, n: int, rng: Rng):
        cfg = self.cfg
        s, ch = cfg.size, cfg.channels
        labels = np.arange(n) % cfg.classes
        labels = labels[rng.permutation(n)]
        ii, jj = np.meshgrid(np.arange(s), np.arange(s), indexing="ij")
        centers = self._centers()
        sigma2 = 2.0 * 1.3 ** 2
        x = rng.normal(0.0, cfg.noise, (n, ch, s, s))
        amp = 1.0 + 0.2 * rng.normal(size=n)
        for idx in range(n):
            c = int(labels[idx])
            mix = _MIXES[c % 3][:ch]
            if c < 9:
                r0, c0 = centers[c]
                bump = np.exp(-((ii - r0) ** 2 + (jj - c0) ** 2) / sigma2)
            else:
                r0, c0 = centers[0]
                r1, c1 = centers[8]
                bump = np.exp(-((ii - r0) ** 2 + (jj - c0) ** 2) / sigma2) + np.exp(
                    -((ii - r1) ** 2 + (jj - c1) ** 2) / sigma2
                )
            x[idx] += amp[idx] * mix[:, None, None] * bump[None]
        return x, labels.astype(np.int64)

    # ---- batch streams ----

    def train_batch(self, rng: Rng, n: int):
        idx = rng.permutation(self.cfg.n_train)[:n]
        return self.x_train[idx], self.y_train[idx]

    def test_batch(self, rng: Rng, n: int):
        idx = rng.permutation(self.cfg.n_test)[:n]
        return self.x_test[idx], self.y_test[idx]

    def region_batch(self, rng: Rng, n: int, mode: str = "data") -> np.ndarray:
        if mode == "data":
            if n > self.cfg.n_train:
                raise ValueError(
                    f"region batch {n} exceeds train pool {self.cfg.n_train}"
                )
            return self.x_train[rng.permutation(self.cfg.n_train)[:n]]
        if mode == "noise":
            return rng.uniform(-1.0, 1.0, (n, self.cfg.channels, self.cfg.size, self.cfg.size))
        raise ValueError(f"unknown region input mode {mode!r}")

    def one_hot(self, labels: np.ndarray) -> np.ndarray:
        out = np.zeros((labels.shape[0], self.cfg.classes))
        out[np.arange(labels.shape[0]), labels] = 1.0
        return out
