"""Validated linear algebra layer.

The determinant is checked two independent ways: LU elimination against the
cofactor expansion hidden inside ``adjugate`` (trace identity), plus closed
forms.  Eigenvalues and singular values are checked against reconstruction
identities rather than against each other.
"""

import numpy as np
import pytest

from odeident import linalg
from odeident.errors import (InvalidInputError, NumericalDegeneracyError)


def test_determinant_2x2_closed_form():
    a = np.array([[3.0, 7.0], [2.0, 5.0]])
    assert linalg.determinant(a) == pytest.approx(1.0, rel=1e-14)


def test_determinant_1x1():
    assert linalg.determinant(np.array([[-2.5]])) == -2.5


@pytest.mark.parametrize("seed", range(6))
def test_determinant_vs_adjugate_trace(seed):
    # A adj(A) = det(A) I gives an independent cofactor-route determinant
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    a = rng.standard_normal((n, n))
    det_lu = linalg.determinant(a)
    adj = linalg.adjugate(a)
    det_cof = np.trace(a @ adj) / n
    assert det_lu == pytest.approx(det_cof, rel=1e-10, abs=1e-12)


def test_determinant_many_matches_scalar():
    rng = np.random.default_rng(7)
    mats = rng.standard_normal((12, 3, 3))
    many = linalg.determinant_many(mats)
    each = [linalg.determinant(m) for m in mats]
    np.testing.assert_allclose(many, each, rtol=1e-13)


def test_determinant_product_rule():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((4, 4))
    b = rng.standard_normal((4, 4))
    assert linalg.determinant(a @ b) == pytest.approx(
        linalg.determinant(a) * linalg.determinant(b), rel=1e-10)


class TestSolve:
    def test_solves_linear_system(self):
        a = np.array([[2.0, 1.0], [1.0, 3.0]])
        b = np.array([3.0, 5.0])
        x = linalg.solve(a, b)
        np.testing.assert_allclose(a @ x, b, atol=1e-14)

    def test_matrix_rhs(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
        b = rng.standard_normal((3, 2))
        x = linalg.solve(a, b)
        np.testing.assert_allclose(a @ x, b, atol=1e-12)

    def test_singular_raises(self):
        a = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(NumericalDegeneracyError):
            linalg.solve(a, np.array([1.0, 0.0]))

    def test_conditioning_guard(self):
        # pivot ratio beyond 1e12 only trips with the check enabled
        a = np.array([[1.0, 0.0], [0.0, 1e-14]])
        b = np.array([1.0, 1.0])
        linalg.solve(a, b)
        with pytest.raises(NumericalDegeneracyError):
            linalg.solve(a, b, check_conditioning=True)


class TestAdjugate:
    def test_one_by_one(self):
        np.testing.assert_allclose(linalg.adjugate(np.array([[7.0]])),
                                   [[1.0]])

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_reconstruction_identity(self, n):
        rng = np.random.default_rng(n)
        a = rng.standard_normal((n, n))
        adj = linalg.adjugate(a)
        d = linalg.determinant(a)
        np.testing.assert_allclose(a @ adj, d * np.eye(n), atol=1e-12)
        np.testing.assert_allclose(adj @ a, d * np.eye(n), atol=1e-12)


class TestSymEigenvalues:
    def test_known_spectrum(self):
        b = np.array([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(linalg.sym_eigenvalues(b), [1.0, 3.0],
                                   rtol=1e-13)

    def test_trace_and_det_invariants(self):
        rng = np.random.default_rng(5)
        b = rng.standard_normal((4, 4))
        b = b @ b.T
        eigs = linalg.sym_eigenvalues(b)
        assert np.sum(eigs) == pytest.approx(np.trace(b), rel=1e-12)
        assert np.prod(eigs) == pytest.approx(linalg.determinant(b),
                                              rel=1e-9)

    def test_psd_clamp(self):
        # a Gram matrix may come out with -1e-16 noise eigenvalues; the
        # eigensolver must not return them negative
        v = np.array([[1.0, 2.0, 3.0]])
        b = v.T @ v
        eigs = linalg.sym_eigenvalues(b)
        assert np.all(eigs >= 0.0)
        assert eigs[-1] == pytest.approx(14.0, rel=1e-13)

    def test_asymmetric_rejected(self):
        b = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(InvalidInputError):
            linalg.sym_eigenvalues(b)


class TestSingularValues:
    @pytest.mark.parametrize("seed", range(4))
    def test_gram_consistency(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((5, 3))
        sv = linalg.singular_values(a)
        gram_eigs = linalg.sym_eigenvalues(a.T @ a)
        np.testing.assert_allclose(np.sort(sv ** 2), gram_eigs,
                                   rtol=1e-9, atol=1e-12)

    def test_diagonal(self):
        a = np.diag([3.0, -1.0, 2.0])
        np.testing.assert_allclose(linalg.singular_values(a),
                                   [1.0, 2.0, 3.0], rtol=1e-13)


class TestMininorm:
    def test_square(self):
        a = np.diag([2.0, 0.5])
        assert linalg.mininorm(a) == pytest.approx(0.5, rel=1e-13)

    def test_tall(self):
        a = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
        assert linalg.mininorm(a) == pytest.approx(1.0, rel=1e-13)

    def test_wide_is_zero(self):
        assert linalg.mininorm(np.ones((2, 4))) == 0.0

    def test_many(self):
        rng = np.random.default_rng(9)
        mats = rng.standard_normal((8, 3, 2))
        many = linalg.mininorm_many(mats)
        each = [linalg.mininorm(m) for m in mats]
        np.testing.assert_allclose(many, each, rtol=1e-12)


def test_spectral_norm_rank_one():
    v = np.array([[1.0], [2.0], [2.0]])
    a = v @ v.T
    # rank one: spectral norm is |v|^2 = 9
    assert linalg.spectral_norm(a) == pytest.approx(9.0, rel=1e-12)


def test_input_validation():
    with pytest.raises(InvalidInputError):
        linalg.determinant(np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        linalg.determinant(np.array([1.0, 2.0]))
