"""Principal component projection used by the landscape plots."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooFewPoints
from .linalg import sym_eig


@dataclass
class Projection:
    """A fitted PCA basis: project any point set into the same coordinates."""

    mean: np.ndarray        # (D,)
    components: np.ndarray  # (dims, D) rows are principal directions
    ratios: np.ndarray      # (dims,) explained-variance ratios, descending
    degenerate: bool        # all fit points identical

    def transform(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.mean) @ self.components.T


def pca_fit(points: np.ndarray, dims: int = 2) -> Projection:
    """Fit a dims-dimensional PCA basis on a point cloud (n, D).

    Components are covariance eigenvectors for the top eigenvalues; each
    component's sign is canonicalized, so the basis is stable under point
    permutations (up to float summation noise). If every point is
    identical the result is flagged degenerate: zero projection, zero
    ratios.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"expected (n, D) points, got shape {pts.shape}")
    n, d = pts.shape
    if n < dims + 1:
        raise TooFewPoints(f"need at least {dims + 1} points for {dims} components, got {n}")
    mean = pts.mean(axis=0)
    centered = pts - mean
    if np.max(np.abs(centered)) == 0.0:
        return Projection(mean, np.zeros((dims, d)), np.zeros(dims), True)

    cov = centered.T @ centered / (n - 1)
    eig = sym_eig(cov)
    values = np.clip(eig.values, 0.0, None)
    total = float(values.sum())
    take = min(dims, d)
    components = np.zeros((dims, d))
    ratios = np.zeros(dims)
    components[:take] = eig.vectors[:, :take].T
    if total > 0.0:
        ratios[:take] = values[:take] / total
    return Projection(mean, components, ratios, False)


def pca_project(points: np.ndarray, dims: int = 2):
    """Convenience wrapper: fit on the points and project them.

    Returns (coords (n, dims), explained-variance ratios (dims,)).
    """
    proj = pca_fit(points, dims)
    return proj.transform(points), proj.ratios
