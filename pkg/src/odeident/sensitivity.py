"""Sensitivity paths, the first-order response map, and its remainder.

Along a reference trajectory the parameter Jacobian D(t) = df/dp defines,
for each analysis interval [tau, theta], the linear response

    Psi(q) = integral_tau^theta Y^-1(s) D(s) q(s) ds,

where Y is the fundamental matrix based at tau.  The re-based perturbed
solution satisfies  x_p(theta) - x_ref(theta) = Y(theta) Psi(dp) + G  with
|G| / sup|dp| -> 0, which is what :func:`remainder` measures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, rk
from .core import (DEFAULT_GRID_POINTS, TimeGrid, VectorFunctionSamples,
                   quadrature, sup_norm)
from .errors import InvalidInputError
from .ode import (Trajectory, _integrate_segment, check_rebase,
                  fundamental_matrix, integrate_trajectory, jacobians)


@dataclass(frozen=True)
class SensitivityPath:
    """D(t) = df/dp sampled along a reference trajectory.

    ``d_values`` has shape (N, n, l) matching ``grid``.  ``d_at`` evaluates
    off-grid points exactly the same way the grid samples were produced, so
    refinement probes are consistent with the stored path.
    """

    grid: TimeGrid
    d_values: np.ndarray = field(repr=False)
    system: object = None
    p0: object = None
    ref: Trajectory = None
    _d_fn: object = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.d_values, dtype=float)
        if vals.ndim != 3 or vals.shape[0] != len(self.grid):
            raise InvalidInputError(
                f"d_values shape {vals.shape} does not match grid")
        object.__setattr__(self, "d_values", vals)

    @classmethod
    def from_matrix_function(cls, fn, grid):
        """Synthetic path from an explicit matrix-valued function of t."""
        vals = np.array([np.atleast_2d(np.asarray(fn(t), dtype=float))
                         for t in grid.points])
        return cls(grid, vals, _d_fn=fn)

    @property
    def n(self):
        return self.d_values.shape[1]

    @property
    def l(self):
        return self.d_values.shape[2]

    def d_at(self, t):
        """Sensitivity matrix D(t), shape (n, l)."""
        i = self.grid.index_of(t)
        if i is not None:
            return self.d_values[i]
        if self._d_fn is not None:
            return np.atleast_2d(np.asarray(self._d_fn(t), dtype=float))
        _, jp = jacobians(self.system, t, self.ref.state(t),
                          self.p0.eval(t))
        return jp

    def b_at(self, t):
        """Gram matrix B(t) = D(t)^T D(t), shape (l, l)."""
        d = self.d_at(t)
        return d.T @ d

    def det_at(self, t, mode):
        """det D(t) in square mode "k", det B(t) in tall mode "h"."""
        if mode == "k":
            return linalg.determinant(self.d_at(t))
        return linalg.determinant(self.b_at(t))

    def det_path(self, mode):
        """Determinant values on the grid, per mode."""
        if mode == "k":
            return linalg.determinant_many(self.d_values)
        grams = np.matmul(self.d_values.transpose(0, 2, 1), self.d_values)
        return linalg.determinant_many(grams)

    def mu_path(self):
        """Mininorm of D(t) on the grid."""
        return linalg.mininorm_many(self.d_values)


def sensitivity_path(system, p0, grid=None, tol=rk.DEFAULT_TOL, ref=None):
    """Sample D(t) = df/dp along the reference trajectory.

    Parameters
    ----------
    system : SystemModel
    p0 : ParamFunction
        Reference parameter function.
    grid : TimeGrid, optional
        Defaults to the uniform 2001-point grid on [0, T].
    tol : float
        Integrator tolerance when the reference trajectory is built here.
    ref : Trajectory, optional
        Reuse an existing reference trajectory (validated to start at
        (0, x0)).

    Returns
    -------
    SensitivityPath
    """
    if grid is None:
        grid = TimeGrid.uniform(0.0, system.T, DEFAULT_GRID_POINTS)
    if ref is None:
        ref = integrate_trajectory(system, p0, tol=tol, grid=grid)
    else:
        check_rebase(ref, 0.0, system.x0, ref.tol)
    d_values = np.empty((len(grid), system.n, system.l))
    for i, t in enumerate(grid.points):
        _, jp = jacobians(system, t, ref.state(t), p0.eval(t))
        d_values[i] = jp
    return SensitivityPath(grid, d_values, system=system, p0=p0, ref=ref)


@dataclass(frozen=True)
class PsiValue:
    """Value of the first-order response map over one interval."""

    tau: float
    theta: float
    value: np.ndarray

    @property
    def norm(self):
        return float(np.sqrt(np.sum(self.value ** 2)))


def _check_interval(path, Y, tau, theta):
    if not tau < theta:
        raise InvalidInputError(f"need tau < theta, got [{tau}, {theta}]")
    if Y is not None and abs(Y.tau - tau) > 1e-12 * max(1.0, abs(tau)):
        raise InvalidInputError(
            f"fundamental matrix is based at {Y.tau}, interval starts at {tau}")


def psi_map(path, Y, tau, theta, q):
    """The linear response Psi(q) over [tau, theta].

    Parameters
    ----------
    path : SensitivityPath
    Y : FundamentalMatrix
        Based at ``tau``.
    tau, theta : float
        Analysis interval inside the path's grid window.
    q : ParamFunction
        Direction, ``q.dim == path.l``.

    Returns
    -------
    PsiValue
        With ``value = integral Y^-1(s) D(s) q(s) ds``, shape (n,).
    """
    _check_interval(path, Y, tau, theta)
    if q.dim != path.l:
        raise InvalidInputError(f"direction dim {q.dim}, expected {path.l}")
    sub = path.grid.restricted(tau, theta)
    integrand = np.empty((len(sub), path.n))
    for i, s in enumerate(sub.points):
        rhs = path.d_at(s) @ q.eval(s)
        integrand[i] = Y.inverse_apply(s, rhs)
    value = quadrature(VectorFunctionSamples(sub, integrand))
    return PsiValue(tau, theta, value)


def psi_operator_norm(path, Y, tau, theta):
    """Upper bound for the integral-norm operator norm of Psi.

    max over the interval of the spectral norm of Y^-1(s) D(s); the
    integral-to-vector map Psi satisfies |Psi(q)| <= bound * int|q|.
    """
    _check_interval(path, Y, tau, theta)
    sub = path.grid.restricted(tau, theta)
    best = 0.0
    for s in sub.points:
        m = Y.inverse_apply(s, path.d_at(s))
        best = max(best, linalg.spectral_norm(np.atleast_2d(m)))
    return best


@dataclass(frozen=True)
class RemainderSample:
    """One measurement of the linearization remainder G."""

    tau: float
    theta: float
    epsilon: float       # sup|dp| over [tau, theta]
    g_norm: float        # |G| at theta
    ratio: float         # g_norm / epsilon (0 when epsilon is 0)


def remainder(system, p0, p, tau, theta, tol=None, ref=None,
              perturbed=None, path=None, Y=None):
    """Measure the linearization remainder of a perturbation over [tau, theta].

    The perturbed solution is re-based at (tau, x_ref(tau)); the remainder is

        G = [x_p(theta) - x_ref(theta)] - Y(theta) Psi(p - p0).

    Parameters
    ----------
    system : SystemModel
    p0, p : ParamFunction
        Reference and perturbed parameter functions.
    tau, theta : float
        Analysis interval, 0 <= tau < theta <= T.
    tol : float, optional
        Integrator tolerance (default: the reference trajectory's, or the
        package default).
    ref, perturbed : Trajectory, optional
        Pre-integrated trajectories.  ``ref`` must start at (0, x0) and
        ``perturbed`` at (tau, x_ref(tau)), both validated within 10 * tol.
    path : SensitivityPath, optional
    Y : FundamentalMatrix, optional
        Based at tau.

    Returns
    -------
    RemainderSample
    """
    if not (0.0 <= tau < theta <= system.T * (1 + 1e-12)):
        raise InvalidInputError(f"bad interval [{tau}, {theta}]")
    if tol is None:
        tol = ref.tol if ref is not None else rk.DEFAULT_TOL
    if ref is None:
        ref = integrate_trajectory(system, p0, tol=tol)
    else:
        check_rebase(ref, 0.0, system.x0, tol)
    x_tau = ref.state(tau)
    if perturbed is None:
        seg_grid = TimeGrid(np.array([tau, theta]))
        perturbed = _integrate_segment(system, p, tau, x_tau, theta, tol,
                                       grid=seg_grid)
    else:
        check_rebase(perturbed, tau, x_tau, tol)
    dx_theta = perturbed.state(theta) - ref.state(theta)

    if path is None:
        path = sensitivity_path(system, p0, tol=tol, ref=ref)
    if Y is None:
        Y = fundamental_matrix(system, ref, tau, tol=tol)
    dp = p.add_scaled(p0, -1.0)
    psi = psi_map(path, Y, tau, theta, dp)

    g = dx_theta - Y.value(theta) @ psi.value
    sub = path.grid.restricted(tau, theta)
    dp_samples = VectorFunctionSamples.from_callable(dp.eval, sub)
    eps = sup_norm(dp_samples)
    g_norm = float(np.sqrt(np.sum(g ** 2)))
    ratio = g_norm / eps if eps > 0.0 else 0.0
    return RemainderSample(tau, theta, eps, g_norm, ratio)
