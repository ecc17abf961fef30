"""Time grids, sampled vector functions, norms, and quadrature.

Conventions used throughout the package:

* a *grid* is a strictly increasing 1-D array of times covering the closed
  analysis interval;
* a sampled vector function stores one row per grid node;
* the pointwise vector norm is Euclidean;
* the function sup norm is ``max_t |q(t)|`` and the integral norm is
  ``int |q(t)| dt``, both taken over the grid's interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

DEFAULT_GRID_POINTS = 2001


def _readonly(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times on a closed interval [a, b]."""

    points: np.ndarray

    def __post_init__(self):
        pts = _readonly(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidInputError("grid needs at least two 1-D points")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("grid points must be finite")
        if not np.all(np.diff(pts) > 0.0):
            raise InvalidInputError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, a, b, n=DEFAULT_GRID_POINTS):
        """Uniform grid of ``n`` points on [a, b]."""
        if not b > a:
            raise InvalidInputError(f"need b > a, got [{a}, {b}]")
        if n < 2:
            raise InvalidInputError("need at least two grid points")
        return cls(np.linspace(float(a), float(b), int(n)))

    @property
    def a(self):
        return float(self.points[0])

    @property
    def b(self):
        return float(self.points[-1])

    @property
    def span(self):
        return self.b - self.a

    def __len__(self):
        return self.points.size

    def index_of(self, t, tol=0.0):
        """Index of the grid node equal to ``t`` within ``tol``, else None."""
        pts = self.points
        i = int(np.searchsorted(pts, t - tol, side="left"))
        if i < pts.size and abs(pts[i] - t) <= tol:
            return i
        return None

    def restricted(self, tau, theta):
        """Subgrid covering [tau, theta] with both endpoints inserted.

        Interior nodes strictly inside (tau, theta) are kept as-is, so
        quadrature on the restriction agrees with quadrature on the parent
        grid up to the two boundary cells.
        """
        if not (self.a - 1e-12 <= tau < theta <= self.b + 1e-12):
            raise InvalidInputError(
                f"[{tau}, {theta}] is not inside [{self.a}, {self.b}]")
        pts = self.points
        inner = pts[(pts > tau) & (pts < theta)]
        # Drop interior nodes indistinguishable from the endpoints.
        eps = 1e-12 * max(1.0, self.span)
        inner = inner[(inner - tau > eps) & (theta - inner > eps)]
        return TimeGrid(np.concatenate(([tau], inner, [theta])))


@dataclass(frozen=True)
class VectorFunctionSamples:
    """A vector-valued function sampled on a grid (one row per node)."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != len(self.grid):
            raise InvalidInputError(
                f"samples shape {vals.shape} does not match grid of "
                f"{len(self.grid)} points")
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def from_callable(cls, fn, grid):
        vals = np.array([np.atleast_1d(np.asarray(fn(t), dtype=float))
                         for t in grid.points])
        return cls(grid, vals)

    @property
    def dim(self):
        return self.values.shape[1]

    def pointwise_norms(self):
        """Euclidean norm at each grid node."""
        return np.sqrt(np.sum(self.values * self.values, axis=1))


def sup_norm(samples):
    """Sup norm ``max_t |q(t)|`` of a sampled vector function.

    Parameters
    ----------
    samples : VectorFunctionSamples
        Function samples on the interval of interest.

    Returns
    -------
    float
        Largest pointwise Euclidean norm over the grid nodes.
    """
    norms = samples.pointwise_norms()
    if not np.all(np.isfinite(norms)):
        raise InvalidInputError("non-finite samples in sup_norm")
    return float(np.max(norms))


def quadrature(samples):
    """Componentwise integral of a sampled vector function over its grid.

    Composite Simpson rule on node pairs; non-uniform spacing is handled by
    integrating the interpolating parabola of each node triple exactly.  An
    even node count leaves one trailing interval, integrated with the
    parabola through the last three nodes; a two-point grid degrades to the
    trapezoid rule.

    Returns
    -------
    numpy.ndarray
        Integral of each component, shape ``(dim,)``.
    """
    t = samples.grid.points
    y = samples.values
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("non-finite samples in quadrature")
    n = t.size
    if n == 2:
        return 0.5 * (t[1] - t[0]) * (y[0] + y[1])
    total = np.zeros(y.shape[1])
    last_pair_start = n - 1 - ((n - 1) % 2)  # even number of whole pairs
    for i in range(0, last_pair_start - 1, 2):
        total += _parabola_integral(t[i], t[i + 1], t[i + 2],
                                    y[i], y[i + 1], y[i + 2],
                                    t[i], t[i + 2])
    if last_pair_start != n - 1:
        # Odd trailing interval: parabola through the last three nodes,
        # integrated over the final interval only.
        total += _parabola_integral(t[n - 3], t[n - 2], t[n - 1],
                                    y[n - 3], y[n - 2], y[n - 1],
                                    t[n - 2], t[n - 1])
    return total


def _parabola_integral(t0, t1, t2, f0, f1, f2, a, b):
    """Integral over [a, b] of the parabola through three samples.

    Newton form keeps this exact up to roundoff for any spacing.
    """
    c1 = (f1 - f0) / (t1 - t0)
    c2 = ((f2 - f1) / (t2 - t1) - c1) / (t2 - t0)

    def antideriv(u):
        # integral of f0 + c1*(u-t0) + c2*(u-t0)*(u-t1)
        lin = f0 * u + c1 * (0.5 * u * u - t0 * u)
        quad = c2 * (u ** 3 / 3.0 - 0.5 * (t0 + t1) * u * u + t0 * t1 * u)
        return lin + quad

    return antideriv(b) - antideriv(a)


def int_norm(samples):
    """Integral norm ``int |q(t)| dt`` of a sampled vector function.

    The pointwise Euclidean norm is sampled on the grid and integrated with
    :func:`quadrature`.
    """
    norms = samples.pointwise_norms()
    if not np.all(np.isfinite(norms)):
        raise InvalidInputError("non-finite samples in int_norm")
    scalar = VectorFunctionSamples(samples.grid, norms[:, None])
    return float(quadrature(scalar)[0])
