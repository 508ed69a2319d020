"""Numpy reference implementations of the hot kernels.

This is the fallback lane used when the compiled extension is unavailable
(or when TEGNAS_BACKEND=python). Same contracts as _kernels.pyx: float64,
stride-1 "same" convolutions with zero padding, adjoints exact.
"""
from __future__ import annotations

import numpy as np


def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    # (B, C, H, W) -> (B, C*kh*kw, H*W) patch matrix, zero-padded so the
    # output grid matches the input grid.
    b, c, h, w = x.shape
    ph, pw = (kh - 1) // 2, (kw - 1) // 2
    if ph or pw:
        x = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = np.empty((b, c, kh, kw, h, w), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = x[:, :, i:i + h, j:j + w]
    return cols.reshape(b, c * kh * kw, h * w)


def conv2d_forward(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x (B,Ci,H,W), w (Co,Ci,kh,kw) -> (B,Co,H,W)."""
    b, _, h, wd = x.shape
    co = w.shape[0]
    cols = _im2col(x, w.shape[2], w.shape[3])
    out = np.matmul(w.reshape(co, -1)[None], cols)
    return out.reshape(b, co, h, wd)


def conv2d_grad_input(g: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Adjoint of conv2d_forward in its input: g (B,Co,H,W) -> (B,Ci,H,W)."""
    # same-padding stride-1 adjoint = same-conv with the flipped, transposed
    # kernel
    wt = np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    return conv2d_forward(g, wt)


def conv2d_grad_weight(x: np.ndarray, g: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Batch-summed weight gradient: x (B,Ci,H,W), g (B,Co,H,W) -> (Co,Ci,kh,kw)."""
    b, ci, h, w = x.shape
    co = g.shape[1]
    gm = g.reshape(b, co, h * w)
    cols = _im2col(x, kh, kw)
    gw = np.tensordot(gm, cols, axes=([0, 2], [0, 2]))
    return gw.reshape(co, ci, kh, kw)


def conv2d_grad_weight_batched(x: np.ndarray, g: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Per-sample weight gradients: -> (B,Co,Ci,kh,kw)."""
    b, ci, h, w = x.shape
    co = g.shape[1]
    gm = g.reshape(b, co, h * w)
    cols = _im2col(x, kh, kw)
    gw = np.matmul(gm, cols.transpose(0, 2, 1))
    return gw.reshape(b, co, ci, kh, kw)


def avgpool3x3_forward(x: np.ndarray) -> np.ndarray:
    """3x3 mean filter, stride 1, zero padding, divisor fixed at 9."""
    b, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    out = np.zeros_like(x)
    for i in range(3):
        for j in range(3):
            out += xp[:, :, i:i + h, j:j + w]
    return out / 9.0


def avgpool3x3_grad(g: np.ndarray) -> np.ndarray:
    # symmetric stencil with zero padding is self-adjoint
    return avgpool3x3_forward(g)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Round-robin cyclic ordering: each round rotates floor(n/2) disjoint
    pivot pairs at once, applied as a single orthogonal similarity, so a
    sweep is ~2(n-1) matmuls instead of n(n-1)/2 scalar rotations. Returns
    (eigenvalues unsorted, eigenvector columns, converged flag).
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a[0, :1].copy(), v, True
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return np.zeros(n), v, True

    def _off2(mat):
        # direct off-diagonal mass; a sum-minus-diagonal formulation would
        # hit cancellation noise ~eps*fro^2 and never reach the goal
        off = mat - np.diag(np.diag(mat))
        return float(np.sum(off * off))

    m = n + (n & 1)  # pad a bye slot when n is odd
    base = list(range(m))
    for _sweep in range(max_sweeps):
        if _off2(a) <= (tol * fro) ** 2:
            return np.diag(a).copy(), v, True
        order = base[:]
        for _round in range(m - 1):
            ps, qs = [], []
            for k in range(m // 2):
                i, j = order[k], order[m - 1 - k]
                if i < n and j < n:
                    ps.append(min(i, j))
                    qs.append(max(i, j))
            p = np.asarray(ps)
            q = np.asarray(qs)
            apq = a[p, q]
            live = np.abs(apq) > 1e-300
            if np.any(live):
                p, q, apq = p[live], q[live], apq[live]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                # smaller-magnitude root of t^2 + 2 t theta - 1 = 0
                with np.errstate(over="ignore"):
                    denom = np.abs(theta) + np.sqrt(theta * theta + 1.0)
                t = np.where(theta == 0.0, 1.0, np.sign(theta) / denom)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
            order = [order[0], order[-1]] + order[1:-1]
        a = 0.5 * (a + a.T)  # kill symmetry drift between sweeps

    ok = _off2(a) <= (tol * fro) ** 2
    return np.diag(a).copy(), v, ok
