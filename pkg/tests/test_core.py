"""Grids, sampled functions, and quadrature."""

import numpy as np
import pytest

from odeident.core import (TimeGrid, VectorFunctionSamples, int_norm,
                           quadrature, sup_norm)
from odeident.errors import InvalidInputError


class TestTimeGrid:
    def test_uniform_endpoints(self):
        g = TimeGrid.uniform(0.0, 2.0, 5)
        assert g.a == 0.0 and g.b == 2.0
        np.testing.assert_allclose(g.points, [0.0, 0.5, 1.0, 1.5, 2.0])

    def test_requires_increasing(self):
        with pytest.raises(InvalidInputError):
            TimeGrid(np.array([0.0, 0.5, 0.5, 1.0]))

    def test_requires_two_points(self):
        with pytest.raises(InvalidInputError):
            TimeGrid(np.array([0.3]))

    def test_points_read_only(self):
        g = TimeGrid.uniform(0.0, 1.0, 3)
        with pytest.raises(ValueError):
            g.points[0] = 5.0

    @pytest.mark.parametrize("t, idx", [(0.0, 0), (0.5, 2), (1.0, 4)])
    def test_index_of_exact(self, t, idx):
        g = TimeGrid.uniform(0.0, 1.0, 5)
        assert g.index_of(t) == idx

    def test_index_of_miss(self):
        g = TimeGrid.uniform(0.0, 1.0, 5)
        assert g.index_of(0.3) is None
        assert g.index_of(0.3, tol=0.1) == 1

    def test_restricted_inserts_endpoints(self):
        g = TimeGrid.uniform(0.0, 1.0, 11)
        sub = g.restricted(0.25, 0.85)
        assert sub.a == pytest.approx(0.25)
        assert sub.b == pytest.approx(0.85)
        # interior nodes of the parent survive
        assert 0.5 in sub.points.tolist()

    def test_restricted_drops_near_duplicates(self):
        # a parent node within 1e-12*span of the new endpoint must not
        # produce a non-increasing pair
        g = TimeGrid.uniform(0.0, 1.0, 11)
        sub = g.restricted(0.3 + 1e-15, 0.9)
        assert np.all(np.diff(sub.points) > 0)

    def test_restricted_bad_interval(self):
        g = TimeGrid.uniform(0.0, 1.0, 11)
        with pytest.raises(InvalidInputError):
            g.restricted(0.9, 0.3)


def _scalar_samples(grid, values):
    return VectorFunctionSamples(grid, np.asarray(values)[:, None])


class TestQuadrature:
    """Composite Simpson is exact for cubics on odd uniform grids."""

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_exact_on_monomials(self, k):
        g = TimeGrid.uniform(0.0, 1.0, 21)
        s = _scalar_samples(g, g.points ** k)
        assert quadrature(s)[0] == pytest.approx(1.0 / (k + 1), abs=1e-14)

    def test_two_points_is_trapezoid(self):
        g = TimeGrid(np.array([0.0, 2.0]))
        s = _scalar_samples(g, [1.0, 3.0])
        assert quadrature(s)[0] == pytest.approx(4.0)

    def test_even_point_count(self):
        # trailing interval handled by a parabola through the last triple
        g = TimeGrid.uniform(0.0, 1.0, 20)
        s = _scalar_samples(g, g.points ** 2)
        assert quadrature(s)[0] == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_nonuniform_quadratic_exact(self):
        rng = np.random.default_rng(42)
        pts = np.sort(rng.uniform(0.0, 1.0, size=17))
        pts[0], pts[-1] = 0.0, 1.0
        g = TimeGrid(pts)
        s = _scalar_samples(g, 3.0 * pts ** 2 - pts + 2.0)
        # integral of 3t^2 - t + 2 on [0,1] is 1 - 1/2 + 2
        assert quadrature(s)[0] == pytest.approx(2.5, abs=1e-12)

    def test_smooth_function_accuracy(self):
        g = TimeGrid.uniform(0.0, np.pi, 201)
        s = _scalar_samples(g, np.sin(g.points))
        assert quadrature(s)[0] == pytest.approx(2.0, abs=1e-8)

    def test_vector_components_independent(self):
        g = TimeGrid.uniform(0.0, 1.0, 21)
        vals = np.stack([g.points, g.points ** 2], axis=1)
        np.testing.assert_allclose(
            quadrature(VectorFunctionSamples(g, vals)),
            [0.5, 1.0 / 3.0], atol=1e-13)

    def test_non_finite_rejected(self):
        g = TimeGrid.uniform(0.0, 1.0, 5)
        vals = np.zeros((5, 1))
        vals[2, 0] = np.nan
        with pytest.raises(InvalidInputError):
            quadrature(VectorFunctionSamples(g, vals))


class TestNorms:
    def test_sup_norm(self):
        g = TimeGrid.uniform(0.0, 1.0, 101)
        s = VectorFunctionSamples.from_callable(
            lambda t: np.array([t - 0.5, 2.0 * t]), g)
        assert sup_norm(s) == pytest.approx(np.hypot(0.5, 2.0))

    def test_int_norm_constant(self):
        g = TimeGrid.uniform(0.0, 2.0, 41)
        s = VectorFunctionSamples.from_callable(
            lambda t: np.array([3.0, 4.0]), g)
        # |(3,4)| = 5 on an interval of length 2
        assert int_norm(s) == pytest.approx(10.0, abs=1e-12)

    def test_int_norm_linear(self):
        g = TimeGrid.uniform(0.0, 1.0, 2001)
        s = VectorFunctionSamples.from_callable(
            lambda t: np.array([t - 0.5]), g)
        assert int_norm(s) == pytest.approx(0.25, abs=1e-9)

    def test_samples_shape_check(self):
        g = TimeGrid.uniform(0.0, 1.0, 5)
        with pytest.raises(InvalidInputError):
            VectorFunctionSamples(g, np.zeros((4, 2)))

    def test_pointwise_norms(self):
        g = TimeGrid.uniform(0.0, 1.0, 3)
        s = VectorFunctionSamples(g, np.array([[3.0, 4.0]] * 3))
        np.testing.assert_allclose(s.pointwise_norms(), [5.0, 5.0, 5.0])
