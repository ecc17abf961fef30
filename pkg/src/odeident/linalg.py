"""Dense linear algebra on small matrices.

Thin validation layer over the kernel backend (compiled when available,
pure Python otherwise).  Matrices are plain ``numpy.ndarray`` values; all
routines accept anything ``np.asarray`` can convert.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import InvalidInputError, NumericalDegeneracyError

# Pivot-ratio bound used as the condition-number proxy when inverting
# fundamental matrices.
COND_PIVOT_RATIO = 1e12

SYMMETRY_TOL = 1e-10


def _as_matrix(a, square=False, name="matrix"):
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be 2-D and nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be square, got {arr.shape}")
    return arr


def determinant(a):
    """Determinant of a square matrix (LU with partial pivoting)."""
    return float(_kernels.det(_as_matrix(a, square=True)))


def determinant_many(mats):
    """Determinant of each matrix in a stack, shape (N, n, n)."""
    arr = np.asarray(mats, dtype=float)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvalidInputError(f"expected (N, n, n) stack, got {arr.shape}")
    return np.asarray(_kernels.det_many(arr))


def solve(a, b, check_conditioning=False):
    """Solve ``a x = b`` for one or many right-hand sides.

    With ``check_conditioning`` the LU pivot ratio is required to stay below
    1e12, a cheap proxy that rejects numerically unreliable inversions.
    """
    arr = _as_matrix(a, square=True)
    rhs = np.asarray(b, dtype=float)
    if rhs.shape[0] != arr.shape[0]:
        raise InvalidInputError(
            f"rhs length {rhs.shape[0]} does not match matrix {arr.shape}")
    ratio = COND_PIVOT_RATIO if check_conditioning else 0.0
    try:
        return np.asarray(_kernels.solve(arr, rhs, ratio))
    except ValueError as exc:
        raise NumericalDegeneracyError(str(exc)) from exc


def adjugate(a):
    """Adjugate (transposed cofactor matrix) of a square matrix.

    Satisfies ``a @ adjugate(a) == determinant(a) * I`` including for
    singular inputs.
    """
    return np.asarray(_kernels.adjugate(_as_matrix(a, square=True)))


def sym_eigenvalues(b):
    """Eigenvalues of a symmetric matrix, ascending.

    Cyclic Jacobi rotations; the input must be symmetric within an absolute
    tolerance of 1e-10 * max(1, max|B|).  Tiny negative eigenvalues from
    roundoff (within 1e-12 * ||B||_F of zero) are clamped to 0.
    """
    arr = _as_matrix(b, square=True, name="symmetric matrix")
    scale = max(1.0, float(np.max(np.abs(arr))))
    if float(np.max(np.abs(arr - arr.T))) > SYMMETRY_TOL * scale:
        raise InvalidInputError("matrix is not symmetric within tolerance")
    return np.asarray(_kernels.sym_eigenvalues(arr))


def singular_values(a):
    """Singular values of a rectangular matrix, ascending.

    Computed as square roots of the eigenvalues of the smaller of the two
    Gram matrices A^T A and A A^T; returns exactly ``min(rows, cols)``
    values.
    """
    return np.asarray(_kernels.singular_values(_as_matrix(a)))


def mininorm(a):
    """``min_{|x|=1} |A x|``: the smallest singular value.

    Zero whenever cols > rows (the map then has a nontrivial kernel).  For
    invertible square A this equals 1 / ||A^-1||.
    """
    return float(_kernels.mininorm(_as_matrix(a)))


def mininorm_many(mats):
    """Mininorm of each matrix in a stack, shape (N, m, k)."""
    arr = np.asarray(mats, dtype=float)
    if arr.ndim != 3:
        raise InvalidInputError(f"expected (N, m, k) stack, got {arr.shape}")
    return np.asarray(_kernels.mininorm_many(arr))


def spectral_norm(a):
    """Operator 2-norm (largest singular value)."""
    return float(_kernels.spectral_norm(_as_matrix(a)))
