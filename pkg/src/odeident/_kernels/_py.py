"""Pure-Python kernel backend.

Same algorithms and iteration order as the compiled backend in ``_cy.pyx``;
results agree to roundoff (the C compiler may contract float expressions, so
bitwise equality is not guaranteed).
"""

import math

import numpy as np

JACOBI_OFF_TOL = 1e-14     # off-diagonal Frobenius, relative to ||B||_F
JACOBI_MAX_SWEEPS = 50
PSD_CLAMP = 1e-12          # negative-eigenvalue clamp, relative to ||B||_F


def det(a):
    """Determinant by LU with partial pivoting."""
    lu = np.array(a, dtype=float)
    n = lu.shape[0]
    sign = 1.0
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if lu[p, k] == 0.0:
            return 0.0
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
            sign = -sign
        for i in range(k + 1, n):
            f = lu[i, k] / lu[k, k]
            lu[i, k] = f
            for j in range(k + 1, n):
                lu[i, j] -= f * lu[k, j]
    out = sign
    for k in range(n):
        out *= lu[k, k]
    return float(out)


def det_many(mats):
    """Determinants of a stack of square matrices, shape (N, n, n)."""
    mats = np.asarray(mats, dtype=float)
    return np.array([det(mats[i]) for i in range(mats.shape[0])])


def solve(a, b, max_ratio=0.0):
    """Solve a x = b by LU with partial pivoting.

    ``b`` may be a vector or a matrix of stacked right-hand sides.  With
    ``max_ratio > 0`` the pivot ratio max|u_ii|/min|u_ii| (a cheap condition
    proxy) is checked and ValueError raised when it exceeds the bound.
    """
    lu = np.array(a, dtype=float)
    n = lu.shape[0]
    rhs = np.array(b, dtype=float)
    vec = rhs.ndim == 1
    if vec:
        rhs = rhs[:, None]
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if lu[p, k] == 0.0:
            raise ValueError("singular matrix")
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
            rhs[[k, p], :] = rhs[[p, k], :]
        for i in range(k + 1, n):
            f = lu[i, k] / lu[k, k]
            lu[i, k] = f
            for j in range(k + 1, n):
                lu[i, j] -= f * lu[k, j]
    if max_ratio > 0.0:
        diag = np.abs(np.diagonal(lu))
        if float(np.max(diag)) > max_ratio * float(np.min(diag)):
            raise ValueError("ill-conditioned matrix")
    for c in range(rhs.shape[1]):
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
    return rhs[:, 0] if vec else rhs


def adjugate(a):
    """Adjugate (transposed cofactor matrix); a * adj(a) = det(a) * I."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return np.array([[1.0]])
    adj = np.empty((n, n))
    rows = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = a[np.ix_(rows != i, rows != j)]
            adj[j, i] = ((-1.0) ** (i + j)) * det(minor)
    return adj


def sym_eigenvalues(b):
    """Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi.

    The input is symmetrized once; sweeps stop when the off-diagonal
    Frobenius mass falls below 1e-14 * ||B||_F or after 50 sweeps.  Tiny
    negative eigenvalues (within 1e-12 * ||B||_F of zero) are clamped to 0
    so Gram matrices stay numerically positive semidefinite.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    a = 0.5 * (b + b.T)
    normb = math.sqrt(float(np.sum(a * a)))
    if n == 1:
        lam = np.array([a[0, 0]])
        return _clamp_psd(lam, normb)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if math.sqrt(off) <= JACOBI_OFF_TOL * normb:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
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
    lam = np.sort(np.diagonal(a).copy())
    return _clamp_psd(lam, normb)


def _clamp_psd(lam, normb):
    lo = -PSD_CLAMP * normb
    for i in range(lam.size):
        if lo <= lam[i] < 0.0:
            lam[i] = 0.0
    return lam


def singular_values(a):
    """Singular values, ascending, via eigenvalues of the smaller Gram matrix."""
    a = np.asarray(a, dtype=float)
    m, k = a.shape
    g = a.T @ a if k <= m else a @ a.T
    lam = sym_eigenvalues(g)
    lam = np.maximum(lam, 0.0)
    return np.sqrt(lam)


def mininorm(a):
    """Smallest singular value; 0 for wide matrices (cols > rows)."""
    a = np.asarray(a, dtype=float)
    m, k = a.shape
    if k > m:
        return 0.0
    return float(singular_values(a)[0])


def mininorm_many(mats):
    """Mininorm of each matrix in a stack, shape (N, m, k)."""
    mats = np.asarray(mats, dtype=float)
    return np.array([mininorm(mats[i]) for i in range(mats.shape[0])])


def spectral_norm(a):
    """Largest singular value."""
    return float(singular_values(np.asarray(a, dtype=float))[-1])
