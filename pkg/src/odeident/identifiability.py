"""Distinguishability checks and certificate-vs-outcome experiments.

Two parameter functions are distinguished by an observation set when the
solutions from the shared initial state (0, x0) differ at some observation
point by more than the resolution threshold (100 times the integrator
tolerance).  The experiment driver sweeps direction x epsilon grids,
certifies every observation interval, and logs any certified-but-
indistinguishable row as a counterexample; an empty log is the consistency
statement the certificates promise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rk
from .certify import certify_membership
from .errors import ClassMembershipError, InvalidInputError
from .expressions import parse_expression
from .ode import ParamFunction, fundamental_matrix, integrate_trajectory
from .sensitivity import sensitivity_path
from .zerofinder import observation_set

DISTINGUISH_TOL_FACTOR = 100.0   # times the integrator tolerance
DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3)

_PROFILE_TEXTS = ("1", "t", "t - 0.5", "(t - 0.5)^2",
                  "sin(6.283185307179586 * t)")


def scalar_profile(text, dim=1, axis=0, T=1.0):
    """Direction from a scalar expression in t, placed on one coordinate.

    ``text`` uses the expression grammar (variable ``t`` only); the result
    is zero on all coordinates except ``axis``.
    """
    expr = parse_expression(text, 0, 0)
    dexpr = expr.diff_t()
    if dim == 1:
        return ParamFunction(
            lambda t: np.array([expr.eval(t)]),
            lambda t: np.array([dexpr.eval(t)]),
            1, description=expr.canonical(), domain=(0.0, T), validate=False)

    def ev(t, _e=expr):
        v = np.zeros(dim)
        v[axis] = _e.eval(t)
        return v

    def dv(t, _e=dexpr):
        v = np.zeros(dim)
        v[axis] = _e.eval(t)
        return v

    return ParamFunction(ev, dv, dim,
                         description=f"e{axis} * ({expr.canonical()})",
                         domain=(0.0, T), validate=False)


def direction_family(dim, T=1.0, texts=_PROFILE_TEXTS):
    """The default direction family: each profile on each coordinate axis.

    Profiles are constant, linear, centered linear, centered quadratic, and
    one full-period sine.
    """
    out = []
    for text in texts:
        for axis in range(dim):
            out.append(scalar_profile(text, dim, axis, T))
    return out


@dataclass(frozen=True)
class DistinguishVerdict:
    """Outcome of comparing two parameter functions at observation points."""

    distinguishable: bool
    separation: float          # max |x_a - x_b| over the points
    witness: float = None      # first point exceeding the threshold
    tol: float = 0.0
    per_point: tuple = ()      # (theta, |x_a - x_b|) pairs

    def to_dict(self):
        return {
            "distinguishable": self.distinguishable,
            "separation": self.separation,
            "witness": self.witness,
            "tol": self.tol,
            "per_point": [list(pair) for pair in self.per_point],
        }


def distinguish(system, p_a, p_b, points, tol=None,
                integrator_tol=rk.DEFAULT_TOL, traj_a=None, traj_b=None):
    """Compare the solutions under two parameter functions at given points.

    Parameters
    ----------
    system : SystemModel
    p_a, p_b : ParamFunction
    points : sequence of float
        Observation points in (0, T]; 0 is allowed but never separates
        (both solutions start at x0).
    tol : float, optional
        Separation threshold; defaults to 100 * integrator_tol.
    traj_a, traj_b : Trajectory, optional
        Reuse full-window trajectories from (0, x0).

    Returns
    -------
    DistinguishVerdict
    """
    pts = sorted(float(t) for t in points)
    if not pts:
        raise InvalidInputError("need at least one observation point")
    if pts[0] < 0.0 or pts[-1] > system.T * (1 + 1e-12):
        raise InvalidInputError("observation points outside [0, T]")
    if tol is None:
        tol = DISTINGUISH_TOL_FACTOR * integrator_tol
    if traj_a is None:
        traj_a = integrate_trajectory(system, p_a, tol=integrator_tol)
    if traj_b is None:
        traj_b = integrate_trajectory(system, p_b, tol=integrator_tol)
    per_point = []
    witness = None
    best = 0.0
    for t in pts:
        sep = float(np.max(np.abs(traj_a.state(t) - traj_b.state(t))))
        per_point.append((t, sep))
        best = max(best, sep)
        if witness is None and sep > tol:
            witness = t
    return DistinguishVerdict(witness is not None, best, witness, tol,
                              tuple(per_point))


@dataclass(frozen=True)
class ExperimentRow:
    """One (direction, epsilon) row of the experiment sweep."""

    direction: str
    eps: float
    certified: bool
    variants: tuple
    distinguished: bool
    separation: float
    witness: float = None
    failure_reasons: tuple = ()

    def to_dict(self):
        return {
            "direction": self.direction,
            "eps": self.eps,
            "certified": self.certified,
            "variants": list(self.variants),
            "distinguished": self.distinguished,
            "separation": self.separation,
            "witness": self.witness,
            "failure_reasons": list(self.failure_reasons),
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Sweep outcome: rows, counterexample log, and summary counts."""

    points: tuple
    rows: tuple
    counterexamples: tuple
    certificates: tuple = field(default=(), repr=False)

    @property
    def n_certified(self):
        return sum(1 for r in self.rows if r.certified)

    @property
    def n_distinguished(self):
        return sum(1 for r in self.rows if r.distinguished)

    def to_dict(self):
        return {
            "points": list(self.points),
            "rows": [r.to_dict() for r in self.rows],
            "counterexamples": [r.to_dict() for r in self.counterexamples],
            "n_rows": len(self.rows),
            "n_certified": self.n_certified,
            "n_distinguished": self.n_distinguished,
        }


def identifiability_experiment(system, p0, directions, eps_grid=DEFAULT_EPS_GRID,
                               mode="auto", tol=rk.DEFAULT_TOL, obs=None,
                               path=None):
    """Certify and distinguish every (direction, epsilon) combination.

    For each row the perturbed function ``p0 + eps * q`` is certified on
    every observation interval and compared against the reference at the
    observation points.  A row that is certified on all intervals but not
    distinguished would contradict what certificates guarantee; such rows
    are collected in ``counterexamples``.

    Parameters
    ----------
    system : SystemModel
    p0 : ParamFunction
    directions : sequence of ParamFunction
    eps_grid : sequence of float
        Strictly positive perturbation sizes.
    mode : str
        Determinant-path mode for the observation set.
    tol : float
        Integrator tolerance.
    obs, path : optional
        Reuse a precomputed observation set / sensitivity path.

    Returns
    -------
    ExperimentReport
    """
    if not directions:
        raise InvalidInputError("need at least one direction")
    eps_grid = [float(e) for e in eps_grid]
    if any(e <= 0.0 for e in eps_grid):
        raise InvalidInputError("eps grid must be strictly positive "
                                "(eps = 0 is the reference itself)")
    if path is None:
        path = sensitivity_path(system, p0, tol=tol)
    if obs is None:
        obs = observation_set(system, p0, mode=mode, path=path)
    y_by_interval = {}
    for k, tau, _theta in obs.intervals():
        y_by_interval[k] = fundamental_matrix(system, path.ref, tau, tol=tol)

    rows = []
    certs_log = []
    counterexamples = []
    for q in directions:
        for eps in eps_grid:
            p = p0.add_scaled(q, eps)
            certified = True
            variants = []
            reasons = []
            for k, tau, theta in obs.intervals():
                try:
                    cert = certify_membership(system, obs, p, p0, k,
                                              path=path, Y=y_by_interval[k],
                                              tol=tol)
                    variants.append(cert.variant)
                    certs_log.append((q.description, eps, cert))
                    if not cert.passed:
                        certified = False
                        reasons.append(
                            f"[{tau:g}, {theta:g}] {cert.failure_reason}")
                except ClassMembershipError as exc:
                    certified = False
                    reasons.append(f"[{tau:g}, {theta:g}] {exc}")
            verdict = distinguish(system, p, p0, obs.points,
                                  integrator_tol=tol, traj_b=path.ref)
            row = ExperimentRow(q.description, eps, certified,
                                tuple(variants), verdict.distinguishable,
                                verdict.separation, verdict.witness,
                                tuple(reasons))
            rows.append(row)
            if certified and not verdict.distinguishable:
                counterexamples.append(row)
    return ExperimentReport(tuple(obs.points), tuple(rows),
                            tuple(counterexamples), tuple(certs_log))


@dataclass(frozen=True)
class NegativeControlRow:
    """Separations of one direction at reduced vs full observation points."""

    direction: str
    eps: float
    reduced_separation: float
    full_separation: float
    indistinguishable_at_reduced: bool
    distinguished_at_full: bool
    full_witness: float = None

    def to_dict(self):
        return {
            "direction": self.direction,
            "eps": self.eps,
            "reduced_separation": self.reduced_separation,
            "full_separation": self.full_separation,
            "indistinguishable_at_reduced": self.indistinguishable_at_reduced,
            "distinguished_at_full": self.distinguished_at_full,
            "full_witness": self.full_witness,
        }


@dataclass(frozen=True)
class NegativeControlReport:
    """Reduced-point control: what the dropped observation points would miss."""

    full_points: tuple
    reduced_points: tuple
    rows: tuple

    def to_dict(self):
        return {
            "full_points": list(self.full_points),
            "reduced_points": list(self.reduced_points),
            "rows": [r.to_dict() for r in self.rows],
        }


def negative_control(system, p0, reduced_points, directions=None, eps=1e-1,
                     mode="auto", tol=rk.DEFAULT_TOL, obs=None):
    """Show what a proper subset of the observation points fails to see.

    ``reduced_points`` must be a proper subset of the computed observation
    set (within 1e-9 * T).  Each direction is perturbed by ``eps`` and
    compared at both point sets.

    Returns
    -------
    NegativeControlReport
    """
    if obs is None:
        obs = observation_set(system, p0, mode=mode, tol=tol)
    pts = list(obs.points)
    match_tol = 1e-9 * system.T
    reduced = []
    for r in reduced_points:
        hits = [t for t in pts if abs(t - float(r)) <= match_tol]
        if not hits:
            raise InvalidInputError(
                f"reduced point {r} is not an observation point of the system")
        reduced.append(hits[0])
    reduced = sorted(set(reduced))
    if len(reduced) >= len(pts):
        raise InvalidInputError(
            "reduced point set must be a proper subset of the observation set")
    if directions is None:
        directions = direction_family(system.l, system.T)
    eps = float(eps)
    if eps <= 0.0:
        raise InvalidInputError("eps must be positive")

    ref = integrate_trajectory(system, p0, tol=tol)
    rows = []
    for q in directions:
        p = p0.add_scaled(q, eps)
        traj = integrate_trajectory(system, p, tol=tol)
        red = distinguish(system, p, p0, reduced, integrator_tol=tol,
                          traj_a=traj, traj_b=ref)
        full = distinguish(system, p, p0, pts, integrator_tol=tol,
                           traj_a=traj, traj_b=ref)
        rows.append(NegativeControlRow(
            q.description, eps, red.separation, full.separation,
            not red.distinguishable, full.distinguishable, full.witness))
    return NegativeControlReport(tuple(pts), tuple(reduced), tuple(rows))
