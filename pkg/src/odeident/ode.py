"""System models, parameter functions, trajectories, fundamental matrices.

A system is ``dx/dt = f(t, x, p(t))`` on the fixed window [0, T] with state
dimension ``n`` and parameter dimension ``l``.  Parameter functions are C1
maps ``t -> R^l`` carrying their own derivative; trajectories and
fundamental matrices wrap dense integrator output so they can be evaluated
anywhere in their window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, rk
from .core import DEFAULT_GRID_POINTS, TimeGrid
from .errors import (DomainViolationError, InvalidInputError,
                     InvalidRebaseError)

_FD_STEP = float(np.cbrt(np.finfo(float).eps))  # ~6.1e-6


@dataclass(frozen=True)
class ParamFunction:
    """A C1 parameter function t -> R^l with an explicit derivative.

    Parameters
    ----------
    eval_fn : callable
        Value at ``t``, shape ``(dim,)``.
    deriv_fn : callable
        Time derivative at ``t``, shape ``(dim,)``.
    dim : int
        Number of parameter coordinates ``l``.
    description : str
        Human-readable formula used in reports.

    The constructor cross-checks ``deriv_fn`` against a central finite
    difference of ``eval_fn`` at a few deterministic points of ``domain``
    (relative tolerance 1e-6) so inconsistent pairs fail fast.
    """

    eval_fn: callable = field(repr=False)
    deriv_fn: callable = field(repr=False)
    dim: int
    description: str = ""
    domain: tuple = (0.0, 1.0)
    validate: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("parameter dimension must be >= 1")
        if self.validate:
            self._check_derivative()

    def _check_derivative(self):
        a, b = self.domain
        rng = np.random.default_rng(20240815)
        pts = a + (b - a) * rng.uniform(0.05, 0.95, size=5)
        h = 1e-6 * max(1.0, b - a)
        for t in pts:
            v = self.eval(t)
            d = self.deriv(t)
            fd = (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
            scale = 1.0 + float(np.max(np.abs(d))) + float(np.max(np.abs(v)))
            if float(np.max(np.abs(fd - d))) > 1e-6 * scale:
                raise InvalidInputError(
                    f"deriv_fn disagrees with finite differences at t={t}")

    def eval(self, t):
        """Parameter value at ``t``, shape ``(dim,)``."""
        v = np.atleast_1d(np.asarray(self.eval_fn(t), dtype=float))
        if v.shape != (self.dim,):
            raise InvalidInputError(
                f"parameter value shape {v.shape}, expected ({self.dim},)")
        return v

    def deriv(self, t):
        """Parameter derivative at ``t``, shape ``(dim,)``."""
        v = np.atleast_1d(np.asarray(self.deriv_fn(t), dtype=float))
        if v.shape != (self.dim,):
            raise InvalidInputError(
                f"parameter derivative shape {v.shape}, expected ({self.dim},)")
        return v

    @classmethod
    def constant(cls, values, description=None, domain=(0.0, 1.0)):
        """Constant parameter function."""
        vals = np.atleast_1d(np.asarray(values, dtype=float)).copy()
        dim = vals.size
        zero = np.zeros(dim)
        if description is None:
            description = ", ".join(format(v, "g") for v in vals)
        return cls(lambda t: vals, lambda t: zero, dim, description,
                   domain, validate=False)

    @classmethod
    def from_callables(cls, eval_fn, deriv_fn, dim, description="",
                       domain=(0.0, 1.0)):
        """Wrap explicit value/derivative callables."""
        return cls(eval_fn, deriv_fn, dim, description, domain)

    def add_scaled(self, other, c):
        """The parameter function ``self + c * other`` (dims must match)."""
        if other.dim != self.dim:
            raise InvalidInputError(
                f"dimension mismatch: {self.dim} vs {other.dim}")
        c = float(c)
        desc = f"({self.description}) + {format(c, 'g')}*({other.description})"
        return ParamFunction(
            lambda t: self.eval(t) + c * other.eval(t),
            lambda t: self.deriv(t) + c * other.deriv(t),
            self.dim, desc, self.domain, validate=False)

    def delta(self, other):
        """The difference ``self - other`` as a parameter function."""
        return self.add_scaled(other, -1.0).replace_description(
            f"({self.description}) - ({other.description})")

    def replace_description(self, description):
        return ParamFunction(self.eval_fn, self.deriv_fn, self.dim,
                             description, self.domain, validate=False)


@dataclass(frozen=True)
class SystemModel:
    """The ODE system dx/dt = f(t, x, p(t)) on [0, T].

    ``rhs(t, x, p) -> (n,)`` is required; analytic Jacobians ``jac_x`` and
    ``jac_p`` are optional and replaced by central finite differences when
    absent.
    """

    n: int
    l: int
    T: float
    x0: np.ndarray
    rhs: callable = field(repr=False)
    jac_x: callable = field(default=None, repr=False)
    jac_p: callable = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.n < 1 or self.l < 1:
            raise InvalidInputError("need n >= 1 and l >= 1")
        if not self.T > 0.0:
            raise InvalidInputError("need T > 0")
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float)).copy()
        if x0.shape != (self.n,):
            raise InvalidInputError(
                f"x0 shape {x0.shape} does not match n={self.n}")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "T", float(self.T))

    def f(self, t, x, p):
        """Right-hand side value, validated to shape ``(n,)``."""
        v = np.atleast_1d(np.asarray(self.rhs(t, x, p), dtype=float))
        if v.shape != (self.n,):
            raise InvalidInputError(
                f"rhs shape {v.shape}, expected ({self.n},)")
        if not np.all(np.isfinite(v)):
            raise DomainViolationError(f"non-finite rhs at t={t}")
        return v

    def ode_rhs(self, p):
        """The time-only right-hand side ``t, x -> f(t, x, p(t))``."""
        return lambda t, x: self.f(t, x, p.eval(t))


def jacobians(system, t, x, p_value):
    """State and parameter Jacobians of the right-hand side at one point.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        ``(J_x, J_p)`` with shapes ``(n, n)`` and ``(n, l)``.  Analytic
        callbacks are used when the system provides them; otherwise central
        finite differences with steps ``cbrt(eps) * max(1, |z_j|)``.
    """
    x = np.asarray(x, dtype=float)
    p_value = np.atleast_1d(np.asarray(p_value, dtype=float))
    if system.jac_x is not None:
        jx = np.asarray(system.jac_x(t, x, p_value), dtype=float)
        if jx.shape != (system.n, system.n):
            raise InvalidInputError(f"jac_x shape {jx.shape}")
    else:
        jx = _fd_jacobian(lambda z: system.f(t, z, p_value), x, system.n)
    if system.jac_p is not None:
        jp = np.asarray(system.jac_p(t, x, p_value), dtype=float)
        if jp.shape != (system.n, system.l):
            raise InvalidInputError(f"jac_p shape {jp.shape}")
    else:
        jp = _fd_jacobian(lambda z: system.f(t, x, z), p_value, system.n)
    if not (np.all(np.isfinite(jx)) and np.all(np.isfinite(jp))):
        raise DomainViolationError(f"non-finite Jacobian at t={t}")
    return jx, jp


def _fd_jacobian(fn, z, n_out):
    z = np.asarray(z, dtype=float)
    out = np.empty((n_out, z.size))
    for j in range(z.size):
        h = _FD_STEP * max(1.0, abs(z[j]))
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        out[:, j] = (fn(zp) - fn(zm)) / (2.0 * h)
    return out


@dataclass(frozen=True)
class Trajectory:
    """A solution segment with dense output.

    ``start_time``/``start_state`` are the integration base point; the
    reference trajectory uses (0, x0), re-based perturbed segments use
    (tau, x_ref(tau)).  ``states`` holds the solution sampled on ``grid``.
    """

    system: SystemModel
    param: ParamFunction
    grid: TimeGrid
    states: np.ndarray
    tol: float
    dense: rk.DenseSolution = field(repr=False)
    start_time: float = 0.0

    @property
    def start_state(self):
        return self.dense.ys[0]

    def state(self, t):
        """State at ``t`` within the integrated window."""
        return self.dense.eval(t)


def _integrate_segment(system, p, t0, x_init, t1, tol, grid=None):
    sol = rk.integrate(system.ode_rhs(p), t0, t1, x_init, tol)
    if grid is None:
        grid = TimeGrid.uniform(t0, t1, DEFAULT_GRID_POINTS)
    states = np.array([sol.eval(t) for t in grid.points])
    return Trajectory(system, p, grid, states, tol, sol, start_time=t0)


def integrate_trajectory(system, p, tol=rk.DEFAULT_TOL, grid=None):
    """Reference trajectory of the system from (0, x0) over [0, T].

    Parameters
    ----------
    system : SystemModel
    p : ParamFunction
        Parameter function with ``p.dim == system.l``.
    tol : float
        Integrator tolerance (absolute and relative).
    grid : TimeGrid, optional
        Sample grid; default is the uniform 2001-point grid on [0, T].

    Returns
    -------
    Trajectory
    """
    if p.dim != system.l:
        raise InvalidInputError(
            f"parameter dim {p.dim} does not match system l={system.l}")
    if grid is None:
        grid = TimeGrid.uniform(0.0, system.T, DEFAULT_GRID_POINTS)
    if grid.a < -1e-12 or grid.b > system.T * (1 + 1e-12) + 1e-12:
        raise InvalidInputError(
            f"grid [{grid.a}, {grid.b}] exceeds system window [0, {system.T}]")
    return _integrate_segment(system, p, 0.0, system.x0, system.T, tol,
                              grid=grid)


@dataclass(frozen=True)
class FundamentalMatrix:
    """Fundamental matrix Y(t) of the variational equation, based at tau.

    Solves ``Y' = J_x(t, x_ref(t), p0(t)) Y`` with ``Y(tau) = I`` and stores
    dense output on [tau, T]; ``value`` reshapes the flattened solution.
    """

    system: SystemModel
    tau: float
    dense: rk.DenseSolution = field(repr=False)
    tol: float = rk.DEFAULT_TOL

    def value(self, t):
        """Y(t) as an (n, n) matrix; exactly I at t = tau."""
        return self.dense.eval(t).reshape(self.system.n, self.system.n)

    def inverse_apply(self, t, rhs):
        """Solve ``Y(t) z = rhs`` (vector or matrix right-hand side).

        Guards conditioning with the LU pivot ratio; a ratio above 1e12
        raises a numerical-degeneracy error.
        """
        return linalg.solve(self.value(t), rhs, check_conditioning=True)


def fundamental_matrix(system, ref, tau, tol=None):
    """Fundamental matrix of the variational equation along ``ref``.

    Parameters
    ----------
    system : SystemModel
    ref : Trajectory
        Reference trajectory covering [tau, T].
    tau : float
        Base time with ``0 <= tau < T``; ``Y(tau) = I``.
    tol : float, optional
        Integrator tolerance, defaulting to the trajectory's.

    Returns
    -------
    FundamentalMatrix
    """
    if not (0.0 <= tau < system.T):
        raise InvalidInputError(f"tau={tau} outside [0, T)")
    if tol is None:
        tol = ref.tol
    p0 = ref.param
    n = system.n

    def rhs(t, y_flat):
        jx, _ = jacobians(system, t, ref.state(t), p0.eval(t))
        return (jx @ y_flat.reshape(n, n)).ravel()

    sol = rk.integrate(rhs, tau, system.T, np.eye(n).ravel(), tol)
    return FundamentalMatrix(system, tau, sol, tol)


def check_rebase(trajectory, t0, x_expected, tol):
    """Validate that a supplied trajectory starts at the expected base point.

    Start time must match to 1e-12 * max(1, |t0|) and the start state to
    10 * tol * (1 + |x|); otherwise an invalid-rebase error is raised.
    """
    if abs(trajectory.start_time - t0) > 1e-12 * max(1.0, abs(t0)):
        raise InvalidRebaseError(
            f"trajectory starts at t={trajectory.start_time}, expected {t0}")
    scale = 1.0 + float(np.max(np.abs(x_expected)))
    err = float(np.max(np.abs(trajectory.start_state - x_expected)))
    if err > 10.0 * tol * scale:
        raise InvalidRebaseError(
            f"trajectory base state differs by {err} at t={t0}")
