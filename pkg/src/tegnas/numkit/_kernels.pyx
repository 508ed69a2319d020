# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: same contracts as _backend_py, loops instead of BLAS.

conv/pool are stride-1 "same" with zero padding; jacobi_eigh is classic
row-cyclic Jacobi (the numpy lane uses the round-robin ordering).
"""
import numpy as np

from libc.math cimport fabs, sqrt


def conv2d_forward(object x_in, object w_in):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, :, :, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t b = x.shape[0], ci = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t co = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ph = (kh - 1) // 2, pw = (kw - 1) // 2
    out_arr = np.zeros((b, co, h, wd))
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t ib, io, ic, i, j, u, v, y, z
    cdef double acc
    with nogil:
        for ib in range(b):
            for io in range(co):
                for i in range(h):
                    for j in range(wd):
                        acc = 0.0
                        for ic in range(ci):
                            for u in range(kh):
                                y = i + u - ph
                                if y < 0 or y >= h:
                                    continue
                                for v in range(kw):
                                    z = j + v - pw
                                    if z < 0 or z >= wd:
                                        continue
                                    acc += w[io, ic, u, v] * x[ib, ic, y, z]
                        out[ib, io, i, j] = acc
    return out_arr


def conv2d_grad_input(object g_in, object w_in):
    cdef double[:, :, :, ::1] g = np.ascontiguousarray(g_in, dtype=np.float64)
    cdef double[:, :, :, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t b = g.shape[0], co = g.shape[1], h = g.shape[2], wd = g.shape[3]
    cdef Py_ssize_t ci = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ph = (kh - 1) // 2, pw = (kw - 1) // 2
    out_arr = np.zeros((b, ci, h, wd))
    cdef double[:, :, :, ::1] dx = out_arr
    cdef Py_ssize_t ib, io, ic, m, n, u, v, y, z
    cdef double acc
    with nogil:
        for ib in range(b):
            for ic in range(ci):
                for m in range(h):
                    for n in range(wd):
                        acc = 0.0
                        for io in range(co):
                            for u in range(kh):
                                y = m - u + ph
                                if y < 0 or y >= h:
                                    continue
                                for v in range(kw):
                                    z = n - v + pw
                                    if z < 0 or z >= wd:
                                        continue
                                    acc += w[io, ic, u, v] * g[ib, io, y, z]
                        dx[ib, ic, m, n] = acc
    return out_arr


def conv2d_grad_weight(object x_in, object g_in, Py_ssize_t kh, Py_ssize_t kw):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, :, :, ::1] g = np.ascontiguousarray(g_in, dtype=np.float64)
    cdef Py_ssize_t b = x.shape[0], ci = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t co = g.shape[1]
    cdef Py_ssize_t ph = (kh - 1) // 2, pw = (kw - 1) // 2
    out_arr = np.zeros((co, ci, kh, kw))
    cdef double[:, :, :, ::1] gw = out_arr
    cdef Py_ssize_t ib, io, ic, i, j, u, v, y, z
    cdef double acc
    with nogil:
        for io in range(co):
            for ic in range(ci):
                for u in range(kh):
                    for v in range(kw):
                        acc = 0.0
                        for ib in range(b):
                            for i in range(h):
                                y = i + u - ph
                                if y < 0 or y >= h:
                                    continue
                                for j in range(wd):
                                    z = j + v - pw
                                    if z < 0 or z >= wd:
                                        continue
                                    acc += g[ib, io, i, j] * x[ib, ic, y, z]
                        gw[io, ic, u, v] = acc
    return out_arr


def conv2d_grad_weight_batched(object x_in, object g_in, Py_ssize_t kh, Py_ssize_t kw):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, :, :, ::1] g = np.ascontiguousarray(g_in, dtype=np.float64)
    cdef Py_ssize_t b = x.shape[0], ci = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t co = g.shape[1]
    cdef Py_ssize_t ph = (kh - 1) // 2, pw = (kw - 1) // 2
    out_arr = np.zeros((b, co, ci, kh, kw))
    cdef double[:, :, :, :, ::1] gw = out_arr
    cdef Py_ssize_t ib, io, ic, i, j, u, v, y, z
    cdef double acc
    with nogil:
        for ib in range(b):
            for io in range(co):
                for ic in range(ci):
                    for u in range(kh):
                        for v in range(kw):
                            acc = 0.0
                            for i in range(h):
                                y = i + u - ph
                                if y < 0 or y >= h:
                                    continue
                                for j in range(wd):
                                    z = j + v - pw
                                    if z < 0 or z >= wd:
                                        continue
                                    acc += g[ib, io, i, j] * x[ib, ic, y, z]
                            gw[ib, io, ic, u, v] = acc
    return out_arr


def avgpool3x3_forward(object x_in):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t b = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    out_arr = np.zeros((b, c, h, wd))
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t ib, ic, i, j, u, v, y, z
    cdef double acc
    with nogil:
        for ib in range(b):
            for ic in range(c):
                for i in range(h):
                    for j in range(wd):
                        acc = 0.0
                        for u in range(3):
                            y = i + u - 1
                            if y < 0 or y >= h:
                                continue
                            for v in range(3):
                                z = j + v - 1
                                if z < 0 or z >= wd:
                                    continue
                                acc += x[ib, ic, y, z]
                        out[ib, ic, i, j] = acc / 9.0
    return out_arr


def avgpool3x3_grad(object g_in):
    # symmetric stencil with zero padding is self-adjoint
    return avgpool3x3_forward(g_in)


def jacobi_eigh(object a_in, double tol=1e-12, int max_sweeps=60):
    """Row-cyclic Jacobi. Returns (eigenvalues unsorted, eigenvectors, ok)."""
    a_arr = np.array(a_in, dtype=np.float64, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    if n == 1:
        return np.diagonal(a_arr).copy(), v_arr, True

    cdef double fro2 = 0.0, off2, goal, app, aqq, apq, theta, t, c, s, tp, tq
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef bint converged = False
    with nogil:
        for p in range(n):
            for q in range(n):
                fro2 += a[p, q] * a[p, q]
    if fro2 == 0.0:
        return np.diagonal(a_arr).copy(), v_arr, True
    goal = tol * tol * fro2

    for sweep in range(max_sweeps):
        off2 = 0.0
        with nogil:
            for p in range(n):
                for q in range(p + 1, n):
                    off2 += 2.0 * a[p, q] * a[p, q]
        if off2 <= goal:
            converged = True
            break
        with nogil:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if fabs(apq) <= 1e-300:
                        continue
                    app = a[p, p]
                    aqq = a[q, q]
                    theta = (aqq - app) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = 1.0 / (theta - sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):  # columns: A <- A J
                        tp = a[i, p]
                        tq = a[i, q]
                        a[i, p] = c * tp - s * tq
                        a[i, q] = s * tp + c * tq
                    for i in range(n):  # rows: A <- J^T A
                        tp = a[p, i]
                        tq = a[q, i]
                        a[p, i] = c * tp - s * tq
                        a[q, i] = s * tp + c * tq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):  # V <- V J
                        tp = v[i, p]
                        tq = v[i, q]
                        v[i, p] = c * tp - s * tq
                        v[i, q] = s * tp + c * tq

    if not converged:
        off2 = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off2 += 2.0 * a[p, q] * a[p, q]
        converged = off2 <= goal
    return np.diagonal(a_arr).copy(), v_arr, bool(converged)
