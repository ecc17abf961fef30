# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernel backend.

Same algorithms and iteration order as ``_py.py``; see that module for the
reference implementation and tolerances.
"""

import numpy as np

from libc.math cimport fabs, sqrt

JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 50
PSD_CLAMP = 1e-12


cdef double _det_inplace(double[:, ::1] lu) noexcept:
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t k, i, j, p
    cdef double f, best, out
    cdef double sign = 1.0
    for k in range(n - 1):
        p = k
        best = fabs(lu[k, k])
        for i in range(k + 1, n):
            if fabs(lu[i, k]) > best:
                best = fabs(lu[i, k])
                p = i
        if lu[p, k] == 0.0:
            return 0.0
        if p != k:
            for j in range(n):
                f = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = f
            sign = -sign
        for i in range(k + 1, n):
            f = lu[i, k] / lu[k, k]
            lu[i, k] = f
            for j in range(k + 1, n):
                lu[i, j] -= f * lu[k, j]
    out = sign
    for k in range(n):
        out *= lu[k, k]
    return out


def det(a):
    """Determinant by LU with partial pivoting."""
    cdef double[:, ::1] lu = np.array(a, dtype=np.float64, order="C")
    return _det_inplace(lu)


def det_many(mats):
    """Determinants of a stack of square matrices, shape (N, n, n)."""
    arr = np.array(mats, dtype=np.float64, order="C")
    cdef double[:, :, ::1] view = arr
    cdef Py_ssize_t n_mats = view.shape[0]
    cdef Py_ssize_t n = view.shape[1]
    out = np.empty(n_mats)
    cdef double[::1] out_v = out
    scratch = np.empty((n, n))
    cdef double[:, ::1] lu = scratch
    cdef Py_ssize_t m, i, j
    for m in range(n_mats):
        for i in range(n):
            for j in range(n):
                lu[i, j] = view[m, i, j]
        out_v[m] = _det_inplace(lu)
    return out


def solve(a, b, double max_ratio=0.0):
    """Solve a x = b by LU with partial pivoting.

    ``b`` may be a vector or a matrix of stacked right-hand sides.  With
    ``max_ratio > 0`` the pivot ratio max|u_ii|/min|u_ii| is checked and
    ValueError raised when it exceeds the bound.
    """
    lu_arr = np.array(a, dtype=np.float64, order="C")
    rhs_in = np.array(b, dtype=np.float64, order="C")
    vec = rhs_in.ndim == 1
    if vec:
        rhs_in = rhs_in[:, None].copy()
    cdef double[:, ::1] lu = lu_arr
    cdef double[:, ::1] rhs = rhs_in
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t nc = rhs.shape[1]
    cdef Py_ssize_t k, i, j, p, c
    cdef double f, best, s, dmax, dmin
    for k in range(n):
        p = k
        best = fabs(lu[k, k])
        for i in range(k + 1, n):
            if fabs(lu[i, k]) > best:
                best = fabs(lu[i, k])
                p = i
        if lu[p, k] == 0.0:
            raise ValueError("singular matrix")
        if p != k:
            for j in range(n):
                f = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = f
            for j in range(nc):
                f = rhs[k, j]
                rhs[k, j] = rhs[p, j]
                rhs[p, j] = f
        for i in range(k + 1, n):
            f = lu[i, k] / lu[k, k]
            lu[i, k] = f
            for j in range(k + 1, n):
                lu[i, j] -= f * lu[k, j]
    if max_ratio > 0.0:
        dmax = 0.0
        dmin = fabs(lu[0, 0])
        for k in range(n):
            f = fabs(lu[k, k])
            if f > dmax:
                dmax = f
            if f < dmin:
                dmin = f
        if dmax > max_ratio * dmin:
            raise ValueError("ill-conditioned matrix")
    for c in range(nc):
        for i in range(1, n):
            s = rhs[i, c]
            for j in range(i):
                s -= lu[i, j] * rhs[j, c]
            rhs[i, c] = s
        for i in range(n - 1, -1, -1):
            s = rhs[i, c]
            for j in range(i + 1, n):
                s -= lu[i, j] * rhs[j, c]
            rhs[i, c] = s / lu[i, i]
    return rhs_in[:, 0] if vec else rhs_in


def adjugate(a):
    """Adjugate (transposed cofactor matrix); a * adj(a) = det(a) * I."""
    arr = np.array(a, dtype=np.float64, order="C")
    cdef double[:, ::1] av = arr
    cdef Py_ssize_t n = av.shape[0]
    if n == 1:
        return np.array([[1.0]])
    adj = np.empty((n, n))
    cdef double[:, ::1] adj_v = adj
    minor = np.empty((n - 1, n - 1))
    cdef double[:, ::1] mv = minor
    cdef Py_ssize_t i, j, r, c, ri, ci
    cdef double sign
    for i in range(n):
        for j in range(n):
            ri = 0
            for r in range(n):
                if r == i:
                    continue
                ci = 0
                for c in range(n):
                    if c == j:
                        continue
                    mv[ri, ci] = av[r, c]
                    ci += 1
                ri += 1
            sign = 1.0 if (i + j) % 2 == 0 else -1.0
            adj_v[j, i] = sign * _det_inplace(mv)
    return adj


def sym_eigenvalues(b):
    """Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi.

    Mirrors the pure backend: symmetrize once, sweep until the off-diagonal
    Frobenius mass is below 1e-14 * ||B||_F (max 50 sweeps), clamp tiny
    negative eigenvalues to zero.
    """
    b_arr = np.asarray(b, dtype=np.float64)
    a_arr = np.ascontiguousarray(0.5 * (b_arr + b_arr.T))
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0]
    cdef double normb = 0.0
    cdef Py_ssize_t i, j, p, q, sweep
    cdef double off, apq, theta, sgn, t, c, s, app, aqq, aip, aiq
    for i in range(n):
        for j in range(n):
            normb += a[i, j] * a[i, j]
    normb = sqrt(normb)
    if n > 1:
        for sweep in range(JACOBI_MAX_SWEEPS):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * a[p, q] * a[p, q]
            if sqrt(off) <= JACOBI_OFF_TOL * normb:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    sgn = 1.0 if theta >= 0.0 else -1.0
                    t = sgn / (fabs(theta) + sqrt(1.0 + theta * theta))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    app = a[p, p]
                    aqq = a[q, q]
                    a[p, p] = app - t * apq
                    a[q, q] = aqq + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):
                        if i == p or i == q:
                            continue
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * aiq
                        a[p, i] = a[i, p]
                        a[i, q] = s * aip + c * aiq
                        a[q, i] = a[i, q]
    lam = np.sort(np.diagonal(a_arr).copy())
    cdef double[::1] lam_v = lam
    cdef double lo = -PSD_CLAMP * normb
    for i in range(lam_v.shape[0]):
        if lo <= lam_v[i] < 0.0:
            lam_v[i] = 0.0
    return lam


def singular_values(a):
    """Singular values, ascending, via eigenvalues of the smaller Gram matrix."""
    arr = np.asarray(a, dtype=np.float64)
    m, k = arr.shape
    g = arr.T @ arr if k <= m else arr @ arr.T
    lam = sym_eigenvalues(g)
    lam = np.maximum(lam, 0.0)
    return np.sqrt(lam)


def mininorm(a):
    """Smallest singular value; 0 for wide matrices (cols > rows)."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.shape[1] > arr.shape[0]:
        return 0.0
    return float(singular_values(arr)[0])


def mininorm_many(mats):
    """Mininorm of each matrix in a stack, shape (N, m, k)."""
    arr = np.asarray(mats, dtype=np.float64)
    cdef Py_ssize_t n_mats = arr.shape[0]
    out = np.empty(n_mats)
    cdef Py_ssize_t m
    for m in range(n_mats):
        out[m] = mininorm(arr[m])
    return out


def spectral_norm(a):
    """Largest singular value."""
    return float(singular_values(np.asarray(a, dtype=np.float64))[-1])
