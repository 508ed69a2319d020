"""Symmetric eigendecomposition and SPD solves.

Everything is float64. Matrices are plain 2-D C-contiguous ndarrays; the
eigensolver is cyclic Jacobi (see the backend modules for the two sweep
orderings) wrapped here with validation, sorting, and sign conventions.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import NoConvergence, NonSquare, NotSymmetric, ShapeMismatch, SingularSystem
from . import _active


class EigResult(NamedTuple):
    values: np.ndarray   # descending
    vectors: np.ndarray  # orthonormal columns, vectors[:, i] pairs values[i]


def _require_square(a: np.ndarray, who: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"{who} needs a square matrix, got shape {a.shape}")
    return a


def sym_eig(a: np.ndarray, sym_tol: float = 1e-10, max_sweeps: int = 60) -> EigResult:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Eigenvalues sorted descending; each eigenvector's sign is canonicalized
    (largest-magnitude entry positive) so results are permutation-stable.
    Raises NotSymmetric beyond 1e-10 relative asymmetry, NoConvergence if
    the sweep cap is hit before the off-diagonal mass drops below tolerance.
    """
    a = _require_square(a, "sym_eig")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale > 0.0:
        asym = np.max(np.abs(a - a.T))
        if asym > sym_tol * scale:
            raise NotSymmetric(
                f"asymmetry {asym:.3e} exceeds {sym_tol:.0e} * max|a| = {sym_tol * scale:.3e}"
            )
    sym = 0.5 * (a + a.T)
    values, vectors, ok = _active.kernels.jacobi_eigh(sym, 1e-12, max_sweeps)
    if not ok:
        raise NoConvergence(f"jacobi sweep cap {max_sweeps} hit before convergence")
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    # sign convention: the entry of largest magnitude is positive
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        j = int(np.argmax(np.abs(col)))
        if col[j] < 0.0:
            vectors[:, i] = -col
    return EigResult(values, vectors)


def solve_spd(a: np.ndarray, b: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Solve (a + ridge*I) x = b by Cholesky for SPD-intended a.

    b may be a vector or a matrix of right-hand sides. Raises SingularSystem
    when a pivot falls below 1e-14 * trace even after the ridge.
    """
    a = _require_square(a, "solve_spd")
    b = np.asarray(b, dtype=np.float64)
    n = a.shape[0]
    if b.shape[0] != n:
        raise ShapeMismatch(f"rhs has {b.shape[0]} rows, matrix is {n}x{n}")
    m = a if ridge == 0.0 else a + ridge * np.eye(n)
    pivot_floor = 1e-14 * np.trace(m)

    low = np.zeros((n, n))
    for j in range(n):
        d = m[j, j] - low[j, :j] @ low[j, :j]
        if not np.isfinite(d) or d <= pivot_floor:
            raise SingularSystem(
                f"pivot {d:.3e} at column {j} below floor {pivot_floor:.3e}"
            )
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            low[j + 1:, j] = (m[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]

    vec = b.ndim == 1
    y = np.zeros((n, 1 if vec else b.shape[1]))
    rhs = b.reshape(n, -1)
    for j in range(n):
        y[j] = (rhs[j] - low[j, :j] @ y[:j]) / low[j, j]
    x = np.zeros_like(y)
    for j in range(n - 1, -1, -1):
        x[j] = (y[j] - low[j + 1:, j] @ x[j + 1:]) / low[j, j]
    return x[:, 0] if vec else x
