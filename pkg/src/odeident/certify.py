"""Per-interval class certificates, mininorm paths, and safe perturbations.

A certificate for an interval [tau_k, tau_k+1] measures the constants of
the admissible-perturbation class there:

* alpha: integral norm of dp over the interval relative to its sup norm;
* beta: |Psi(dp)| relative to the integral norm of D dp;
* kappa: one-sided vanishing-rate ratio |D dp| / (dist^nu ||dp||) inside
  windows of length gamma next to vanishing endpoints.

Interval variants are named by which endpoints the determinant path
vanishes at: 1 = both, 2 = right only, 3 = left only, 4 = neither
(prefixed K in square mode, H in tall mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .core import TimeGrid, VectorFunctionSamples, int_norm, sup_norm
from .errors import (DegenerateDirectionError, DegeneratePerturbationError,
                     InadmissibleDirectionError, InvalidInputError,
                     NotInClassHError, PartitionInconsistencyError)
from .ode import fundamental_matrix
from .sensitivity import psi_map, psi_operator_norm, sensitivity_path

BETA_FLOOR = 1e-8            # beta at or below this marks a kernel direction
KAPPA_MIN_DIST_FACTOR = 1e-6  # probe distances down to this times the interval
KAPPA_STEP = 10.0            # decade steps between probe distances
KAPPA_TAIL_GROWTH = 10.0     # last-three growth factor that flags divergence


def classify_interval(obs, k):
    """Variant label of observation interval ``k`` ("K1".."K4"/"H1".."H4").

    Raises
    ------
    PartitionInconsistencyError
        If the vanishing pattern is impossible for the interval's position
        (interior partition points must be zeros of the determinant path).
    """
    if not 0 <= k < len(obs.points) - 1:
        raise InvalidInputError(f"no interval {k} in the observation set")
    last = len(obs.points) - 1
    left_v = obs.orders[k] >= 1
    right_v = obs.orders[k + 1] >= 1
    if k > 0 and not left_v:
        raise PartitionInconsistencyError(
            f"interior point {obs.points[k]} has order 0")
    if k + 1 < last and not right_v:
        raise PartitionInconsistencyError(
            f"interior point {obs.points[k + 1]} has order 0")
    prefix = "K" if obs.mode == "k" else "H"
    if left_v and right_v:
        return prefix + "1"
    if right_v:
        return prefix + "2"
    if left_v:
        return prefix + "3"
    return prefix + "4"


def estimate_alpha(dp, tau, theta, grid=None):
    """Ratio of integral norm to sup norm of ``dp`` over [tau, theta].

    ``grid`` defaults to a uniform 2001-point grid on the interval.

    Raises
    ------
    DegeneratePerturbationError
        If dp vanishes identically on the interval.
    """
    if grid is None:
        sub = TimeGrid.uniform(tau, theta)
    else:
        sub = grid.restricted(tau, theta)
    samples = VectorFunctionSamples.from_callable(dp.eval, sub)
    sup = sup_norm(samples)
    if sup == 0.0:
        raise DegeneratePerturbationError(
            f"perturbation vanishes on [{tau}, {theta}]")
    return int_norm(samples) / sup


def estimate_beta(path, Y, dp, tau, theta):
    """|Psi(dp)| relative to the integral norm of D dp over [tau, theta].

    Values at or below 1e-8 signal a direction in the kernel of the
    response map (the certificate fails for it).

    Raises
    ------
    DegenerateDirectionError
        If D dp vanishes identically on the interval (the ratio is
        undefined; such a direction is invisible at first order).
    """
    sub = path.grid.restricted(tau, theta)
    ddp = VectorFunctionSamples.from_callable(
        lambda s: path.d_at(s) @ dp.eval(s), sub)
    denom = int_norm(ddp)
    scale = float(np.max(ddp.pointwise_norms()))
    if denom <= 0.0 or scale == 0.0:
        raise DegenerateDirectionError(
            f"sensitivity image of the direction vanishes on [{tau}, {theta}]")
    psi = psi_map(path, Y, tau, theta, dp)
    return psi.norm / denom


@dataclass(frozen=True)
class KappaCheck:
    """Result of one window's vanishing-rate probe."""

    side: str          # "left" (window after tau) or "right" (before theta)
    gamma: float       # window length
    nu: int            # exponent in dist^nu
    kappa: float       # largest observed ratio (inf when unbounded)
    holds: bool
    samples: tuple     # (distance, ratio) pairs, outermost first


def check_kappa(path, dp, tau, theta, nu, side, gamma, sup_dp=None):
    """Probe the bound |D dp| <= kappa * dist^nu * sup|dp| in one window.

    Ratios are sampled at decade-spaced distances from the vanishing
    endpoint, from ``gamma`` down to 1e-6 times the interval length.  A
    tail of three increasing ratios growing by more then a factor 10 in
    total marks the bound as unbounded (holds = False, kappa = inf).
    """
    if side not in ("left", "right"):
        raise InvalidInputError(f"side must be 'left' or 'right', not {side!r}")
    if not 0.0 < gamma <= (theta - tau):
        raise InvalidInputError(f"window {gamma} outside (0, {theta - tau}]")
    if sup_dp is None:
        sub = path.grid.restricted(tau, theta)
        sup_dp = sup_norm(VectorFunctionSamples.from_callable(dp.eval, sub))
    if sup_dp == 0.0:
        raise DegeneratePerturbationError(
            f"perturbation vanishes on [{tau}, {theta}]")
    anchor = tau if side == "left" else theta
    sign = 1.0 if side == "left" else -1.0
    d_min = KAPPA_MIN_DIST_FACTOR * (theta - tau)

    dists = [gamma]
    d = gamma / KAPPA_STEP
    while d >= d_min:
        dists.append(d)
        d /= KAPPA_STEP
    ratios = []
    for d in dists:
        t = anchor + sign * d
        v = float(np.sqrt(np.sum((path.d_at(t) @ dp.eval(t)) ** 2)))
        ratios.append(v / (d ** nu * sup_dp))
    unbounded = (len(ratios) >= 3
                 and ratios[-1] > ratios[-2] > ratios[-3]
                 and ratios[-1] > KAPPA_TAIL_GROWTH * ratios[-3])
    kappa = math.inf if unbounded else max(ratios)
    return KappaCheck(side, gamma, nu, kappa, not unbounded,
                      tuple(zip(dists, ratios)))


@dataclass(frozen=True)
class ClassCertificate:
    """Measured class constants of one perturbation on one interval."""

    interval_index: int
    tau: float
    theta: float
    variant: str
    alpha: float
    beta: float
    gamma: float         # kappa window length (0 when no window applies)
    kappa: float         # largest window ratio (0 when no window applies)
    nu: int              # exponent used in the kappa bound
    psi_norm: float
    passed: bool
    failure_reason: str = None
    kappa_checks: tuple = field(default=(), repr=False)
    note: str = ""

    def to_dict(self):
        return {
            "interval_index": self.interval_index,
            "tau": self.tau,
            "theta": self.theta,
            "variant": self.variant,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "kappa": None if math.isinf(self.kappa) else self.kappa,
            "kappa_unbounded": bool(math.isinf(self.kappa)),
            "nu": self.nu,
            "psi_norm": self.psi_norm,
            "passed": self.passed,
            "failure_reason": self.failure_reason,
            "note": self.note,
        }


def _window_gamma(obs, k, at_left):
    """Default kappa window: half the distance to the far endpoint, capped
    by the zero's order-fit window."""
    tau, theta = obs.points[k], obs.points[k + 1]
    rec = obs.records[k if at_left else k + 1]
    gamma = 0.5 * (theta - tau)
    if rec is not None:
        gamma = min(gamma, rec.window)
    return gamma


def certify_membership(system, obs, p, p0, interval_index, path=None, Y=None,
                       tol=None):
    """Measure the class constants of ``p - p0`` on one observation interval.

    Parameters
    ----------
    system : SystemModel
    obs : ObservationSet
    p, p0 : ParamFunction
        Perturbed and reference parameter functions.
    interval_index : int
    path : SensitivityPath, optional
    Y : FundamentalMatrix, optional
        Based at the interval's left endpoint.
    tol : float, optional
        Integrator tolerance for anything built here.

    Returns
    -------
    ClassCertificate
        ``passed`` is True when beta exceeds the kernel floor and every
        applicable window bound holds.

    Raises
    ------
    DegeneratePerturbationError
        If p - p0 vanishes identically on the interval.
    """
    k = interval_index
    variant = classify_interval(obs, k)
    tau, theta = obs.points[k], obs.points[k + 1]
    if path is None:
        kwargs = {} if tol is None else {"tol": tol}
        path = sensitivity_path(system, p0, **kwargs)
    if Y is None:
        kwargs = {} if tol is None else {"tol": tol}
        Y = fundamental_matrix(system, path.ref, tau, **kwargs)

    dp = p.add_scaled(p0, -1.0)
    sub = path.grid.restricted(tau, theta)
    dp_samples = VectorFunctionSamples.from_callable(dp.eval, sub)
    sup_dp = sup_norm(dp_samples)
    if sup_dp == 0.0:
        raise DegeneratePerturbationError(
            f"perturbation vanishes on [{tau}, {theta}]")
    alpha = int_norm(dp_samples) / sup_dp
    psi_norm = psi_operator_norm(path, Y, tau, theta)

    failure = None
    try:
        beta = estimate_beta(path, Y, dp, tau, theta)
    except DegenerateDirectionError as exc:
        beta = 0.0
        failure = str(exc)

    if obs.mode == "h":
        nu = 1
    else:
        nu = max(obs.orders[k], obs.orders[k + 1])
    checks = []
    gamma = 0.0
    kappa = 0.0
    if obs.orders[k] >= 1:
        g = _window_gamma(obs, k, at_left=True)
        checks.append(check_kappa(path, dp, tau, theta, nu, "left", g,
                                  sup_dp=sup_dp))
    if obs.orders[k + 1] >= 1:
        g = _window_gamma(obs, k, at_left=False)
        checks.append(check_kappa(path, dp, tau, theta, nu, "right", g,
                                  sup_dp=sup_dp))
    if checks:
        gamma = min(c.gamma for c in checks)
        kappa = max(c.kappa for c in checks)

    kappa_holds = all(c.holds for c in checks)
    if failure is None:
        if beta <= BETA_FLOOR:
            failure = (f"beta {beta:.3e} is at the kernel floor; the "
                       "direction is invisible to the response map")
        elif not kappa_holds:
            bad = next(c for c in checks if not c.holds)
            failure = (f"vanishing-rate ratio diverges in the {bad.side} "
                       f"window (gamma={bad.gamma:.3e})")
    passed = failure is None
    return ClassCertificate(k, tau, theta, variant, alpha, beta, gamma,
                            kappa, nu, psi_norm, passed, failure,
                            tuple(checks))


@dataclass(frozen=True)
class LambdaBound:
    """Lower-bound estimate for |D r|_int / |r|_int over witness directions."""

    tau: float
    theta: float
    lambda_hat: float
    witnesses: tuple   # (description, ratio) pairs


def lambda_bound(path, tau, theta, witnesses):
    """Smallest ratio int|D r| / int|r| over the witness directions.

    Raises
    ------
    InvalidInputError
        On an empty witness list or a witness vanishing on the interval.
    """
    if not witnesses:
        raise InvalidInputError("need at least one witness direction")
    sub = path.grid.restricted(tau, theta)
    rows = []
    for r in witnesses:
        r_samples = VectorFunctionSamples.from_callable(r.eval, sub)
        denom = int_norm(r_samples)
        if denom <= 0.0:
            raise InvalidInputError(
                f"witness {r.description!r} vanishes on [{tau}, {theta}]")
        dr = VectorFunctionSamples.from_callable(
            lambda s: path.d_at(s) @ r.eval(s), sub)
        rows.append((r.description, int_norm(dr) / denom))
    lam = min(ratio for _, ratio in rows)
    return LambdaBound(tau, theta, lam, tuple(rows))


@dataclass(frozen=True)
class RankDropPoint:
    """Mininorm slope data at one rank-drop point of a tall path."""

    c: float
    h: float              # sqrt of the Gram determinant's t^2 coefficient
    lam: float            # product of the nonzero Gram eigenvalues at c
    predicted_slope: float
    slope_right: float = None
    slope_left: float = None

    def to_dict(self):
        return {
            "c": self.c,
            "h": self.h,
            "lambda": self.lam,
            "predicted_slope": self.predicted_slope,
            "slope_right": self.slope_right,
            "slope_left": self.slope_left,
        }


@dataclass(frozen=True)
class MininormPath:
    """Mininorm of D(t) on the grid plus rank-drop slope analysis."""

    grid: object
    mu_values: np.ndarray = field(repr=False)
    drops: tuple = ()

    def mu_at_index(self, i):
        return float(self.mu_values[i])


EIG_DROP_FACTOR = 1e-10   # eigenvalue considered zero below this * ||B||


def mininorm_path(path, obs=None, fd_delta=None):
    """Mininorm path of D(t) with one-sided slopes at rank-drop points.

    At every tall-mode observation zero c the Gram matrix B(c) must have a
    one-dimensional kernel; the predicted one-sided slope of the mininorm
    is +-h / sqrt(Lambda) with Lambda the product of the nonzero
    eigenvalues of B(c).  Measured slopes use one-sided differences with
    one Richardson extrapolation step.

    Parameters
    ----------
    path : SensitivityPath
    obs : ObservationSet, optional
        Tall-mode observation set; without it only the mu path is returned.
    fd_delta : float, optional
        Base probe distance (default 1e-3 of the span, clipped to fit).

    Returns
    -------
    MininormPath

    Raises
    ------
    NotInClassHError
        If a rank drop has kernel dimension above one.
    """
    mu = path.mu_path()
    if obs is None:
        return MininormPath(path.grid, mu, ())
    if obs.mode != "h":
        raise InvalidInputError("rank-drop analysis needs a tall-mode "
                                "observation set")
    span = path.grid.span
    # eigenvalue scale from the whole path: at the drop itself every
    # eigenvalue of a 1x1 Gram matrix vanishes, so the local scale is
    # useless there
    d = path.d_values
    b_scale = float(np.max(np.einsum("nij,nij->n", d, d)))
    drops = []
    for k, pt in enumerate(obs.points):
        if obs.orders[k] < 1:
            continue
        rec = obs.records[k]
        b = path.b_at(pt)
        eigs = linalg.sym_eigenvalues(b)
        scale = max(float(eigs[-1]), 0.0, b_scale)
        thr = EIG_DROP_FACTOR * max(scale, 1e-300)
        small = eigs <= thr
        n_small = int(np.sum(small))
        if n_small != 1:
            raise NotInClassHError(
                f"rank drop at t={pt} has kernel dimension {n_small}")
        lam = float(np.prod(eigs[~small])) if np.any(~small) else 1.0
        predicted = rec.h / math.sqrt(lam)

        delta = fd_delta if fd_delta is not None else 1e-3 * span
        gaps = [abs(pt - q) for q in obs.points if q != pt]
        if gaps:
            delta = min(delta, 0.25 * min(gaps))

        def mu_at(t):
            return linalg.mininorm(path.d_at(t))

        mu_c = mu_at(pt)
        slope_r = slope_l = None
        if pt + delta <= path.grid.b:
            s1 = (mu_at(pt + delta) - mu_c) / delta
            s2 = (mu_at(pt + 0.5 * delta) - mu_c) / (0.5 * delta)
            slope_r = 2.0 * s2 - s1
        if pt - delta >= path.grid.a:
            s1 = (mu_at(pt - delta) - mu_c) / (-delta)
            s2 = (mu_at(pt - 0.5 * delta) - mu_c) / (-0.5 * delta)
            slope_l = 2.0 * s2 - s1
        drops.append(RankDropPoint(pt, rec.h, lam, predicted,
                                   slope_r, slope_l))
    return MininormPath(path.grid, mu, tuple(drops))


def perturb_within_class(cert, path, Y, p, p0, q_raw):
    """Scale a raw direction so the perturbed function stays in class.

    Given a passing certificate for ``p`` on its interval, returns
    ``(p + c * q_raw, inherited_certificate)`` where the scale ``c`` keeps
    the perturbed function inside the class with constants (alpha/4,
    beta/4, gamma, 4 kappa).  A zero direction returns ``p`` unchanged with
    the inherited certificate.

    Raises
    ------
    InadmissibleDirectionError
        If the direction violates the window vanishing-rate bound, so no
        positive scale is admissible.
    """
    if not cert.passed:
        raise InvalidInputError("need a passing certificate to perturb")
    tau, theta = cert.tau, cert.theta
    sub = path.grid.restricted(tau, theta)
    q_samples = VectorFunctionSamples.from_callable(q_raw.eval, sub)
    sup_q = sup_norm(q_samples)
    inherited = replace(
        cert,
        alpha=cert.alpha / 4.0,
        beta=cert.beta / 4.0,
        kappa=4.0 * cert.kappa,
        note="inherited constants (alpha/4, beta/4, gamma, 4 kappa)",
    )
    if sup_q == 0.0:
        return p, inherited

    dp = p.add_scaled(p0, -1.0)
    dp_samples = VectorFunctionSamples.from_callable(dp.eval, sub)
    sup_dp = sup_norm(dp_samples)
    int_q = int_norm(q_samples)
    ddp = VectorFunctionSamples.from_callable(
        lambda s: path.d_at(s) @ dp.eval(s), sub)
    int_ddp = int_norm(ddp)
    d_norm = max(linalg.spectral_norm(path.d_at(s)) for s in sub.points)

    bounds = [0.5 * sup_dp / sup_q]
    if cert.psi_norm > 0.0:
        bounds.append((cert.beta * int_ddp / (2.0 * cert.psi_norm)) / int_q)
    if d_norm > 0.0:
        bounds.append((int_ddp / d_norm) / int_q)
    bounds.append((0.5 * cert.alpha * sup_dp) / int_q)

    # window bound: |D (c q)| <= kappa * dist^nu * sup|dp| must keep holding
    for chk in cert.kappa_checks:
        probe = check_kappa(path, q_raw, tau, theta, chk.nu, chk.side,
                            chk.gamma, sup_dp=sup_dp)
        if not probe.holds:
            raise InadmissibleDirectionError(
                f"direction {q_raw.description!r} has a diverging "
                f"vanishing-rate ratio in the {chk.side} window")
        if probe.kappa > 0.0 and cert.kappa > 0.0:
            bounds.append(cert.kappa / probe.kappa)

    c = min(b for b in bounds if b > 0.0)
    return p.add_scaled(q_raw, c), inherited
