"""Determinant-path zeros, local order fits, and observation sets.

The observation set of a system collects the endpoints of [0, T] and every
zero of the determinant path (det D in square mode, det D^T D in tall
mode).  Each zero gets a local model  g(tau + t) = h t^nu + o(t^nu)  fitted
on a geometric ladder of probe distances; the fitted orders become the
order vector that drives interval classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_GRID_POINTS, TimeGrid
from .errors import (InvalidInputError, NotInClassHError,
                     NotPositiveSemidefiniteError, OrderIndeterminateError,
                     PartitionInconsistencyError, WindowTooSmallError)
from .sensitivity import sensitivity_path

BRACKET_TOL_FACTOR = 1e-10   # bracket width target, relative to span
TOUCH_TOL_FACTOR = 1e-8      # tangential-zero value threshold, rel. max|g|
MERGE_FACTOR = 10.0          # zero-merge radius, in bracket tolerances
WINDOW_FACTOR = 0.05         # order-fit window, relative to span
FIT_DEPTH = 8                # probe distances window * 2^-j, j = 0..FIT_DEPTH
ORDER_SLOPE_TOL = 0.15       # max |fitted slope - nearest integer|
MIN_FIT_SAMPLES = 5
SAMPLE_FLOOR_FACTOR = 1e-13  # drop |g| below this times the path scale

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _bisect(fn, lo, hi, f_lo, f_hi, tol):
    # invariant: sign change between lo and hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) != (f_mid < 0.0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _golden_min(fn, lo, hi, tol):
    # golden-section minimization of fn on [lo, hi]
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def find_zeros(g_fn, grid, mode="k", bracket_tol=None, touch_tol=None):
    """Zeros of a scalar path on the grid's interval.

    Sign changes between grid samples are refined by bisection; tangential
    zeros (local minima of |g| that reach the touch tolerance, the only kind
    a nonnegative tall-mode path can have) by golden-section minimization.
    Nearby results are merged within 10 bracket tolerances.

    Parameters
    ----------
    g_fn : callable
        Scalar path, evaluated exactly like the grid samples.
    grid : TimeGrid
    mode : str
        "k" allows sign changes; "h" additionally requires g >= -touch_tol
        everywhere (Gram determinants are nonnegative).
    bracket_tol, touch_tol : float, optional
        Defaults: 1e-10 * span and 1e-8 * max|g|.

    Returns
    -------
    list of float
        Sorted zero locations (endpoints included when the path vanishes
        there).
    """
    t = grid.points
    g = np.array([float(g_fn(ti)) for ti in t])
    if not np.all(np.isfinite(g)):
        raise InvalidInputError("non-finite determinant path")
    gscale = float(np.max(np.abs(g)))
    if gscale == 0.0:
        raise InvalidInputError("determinant path is identically zero")
    if bracket_tol is None:
        bracket_tol = BRACKET_TOL_FACTOR * grid.span
    if touch_tol is None:
        touch_tol = TOUCH_TOL_FACTOR * gscale
    if mode == "h" and float(np.min(g)) < -touch_tol:
        raise NotPositiveSemidefiniteError(
            f"tall-mode determinant path reaches {float(np.min(g))}")

    zeros = []
    exact = set()
    # exact grid hits
    for i in range(t.size):
        if g[i] == 0.0:
            zeros.append(float(t[i]))
            exact.add(float(t[i]))
    # sign changes
    for i in range(t.size - 1):
        if g[i] * g[i + 1] < 0.0:
            zeros.append(_bisect(g_fn, float(t[i]), float(t[i + 1]),
                                 g[i], g[i + 1], bracket_tol))
    # tangential zeros: local minima of |g| dipping to the touch tolerance
    ag = np.abs(g)
    for i in range(1, t.size - 1):
        if ag[i] <= touch_tol and ag[i] <= ag[i - 1] and ag[i] <= ag[i + 1]:
            if g[i] == 0.0:
                continue  # already an exact hit
            if g[i - 1] * g[i] < 0.0 or g[i] * g[i + 1] < 0.0:
                continue  # handled by bisection
            t_star = _golden_min(lambda s: abs(float(g_fn(s))),
                                 float(t[i - 1]), float(t[i + 1]),
                                 bracket_tol)
            if abs(float(g_fn(t_star))) <= touch_tol:
                zeros.append(t_star)
    # vanishing endpoints
    if ag[0] <= touch_tol:
        zeros.append(float(t[0]))
    if ag[-1] <= touch_tol:
        zeros.append(float(t[-1]))

    # merge and snap
    merge_r = MERGE_FACTOR * bracket_tol
    zeros.sort()
    merged = []
    for z in zeros:
        if merged and z - merged[-1][-1] <= merge_r:
            merged[-1].append(z)
        else:
            merged.append([z])
    out = []
    for cluster in merged:
        hits = [z for z in cluster if z in exact]
        # an exact node hit pins the whole cluster
        z = hits[0] if hits else sum(cluster) / len(cluster)
        if z - grid.a <= merge_r:
            z = grid.a
        elif grid.b - z <= merge_r:
            z = grid.b
        out.append(min(max(z, grid.a), grid.b))
    return sorted(set(out))


@dataclass(frozen=True)
class ZeroRecord:
    """Local model of one determinant-path zero: g(tau + t) ~ h t^nu.

    In tall mode the stored coefficient is sqrt of the t^2 coefficient of
    the Gram determinant (so it is the one-sided slope scale of the
    mininorm path) and nu is the fitted order 2.  ``window`` is the probe
    window used for the fit; ``residual`` is a normalized log-space fit
    error in [0, 1); ``endpoint`` flags one-sided fits.
    """

    tau: float
    nu: int
    h: float
    residual: float
    window: float
    endpoint: bool = False


def estimate_order(g_fn, tau, window, lo, hi, mode="k", depth=FIT_DEPTH,
                   gscale=None):
    """Fit order and leading coefficient of a path zero at ``tau``.

    Probes g at distances ``window * 2^-j`` (j = 0..depth) on every side of
    ``tau`` that stays inside [lo, hi], fits a line to log|g| vs log(dist),
    and rounds the slope to the nearest integer order.

    Returns
    -------
    ZeroRecord

    Raises
    ------
    WindowTooSmallError
        Fewer than 5 usable probes (after dropping values at the noise
        floor).
    OrderIndeterminateError
        Slope further than 0.15 from every integer >= 1, or (tall mode) an
        order other than 2.
    """
    if window <= 0.0:
        raise WindowTooSmallError("order-fit window must be positive")
    w_right = min(window, hi - tau)
    w_left = min(window, tau - lo)
    dists, vals, signed = [], [], []
    for w, side in ((w_right, +1.0), (w_left, -1.0)):
        if w <= 0.0:
            continue
        for j in range(depth + 1):
            d = w * 0.5 ** j
            gv = float(g_fn(tau + side * d))
            dists.append(d)
            vals.append(gv)
            signed.append(side * d)
    vals = np.array(vals)
    dists = np.array(dists)
    signed = np.array(signed)
    if gscale is None:
        gscale = float(np.max(np.abs(vals))) if vals.size else 0.0
    floor = SAMPLE_FLOOR_FACTOR * gscale
    keep = np.abs(vals) > floor
    if int(np.sum(keep)) < MIN_FIT_SAMPLES:
        raise WindowTooSmallError(
            f"only {int(np.sum(keep))} usable probes near t={tau}")
    x = np.log(dists[keep])
    y = np.log(np.abs(vals[keep]))
    slope, intercept = np.polyfit(x, y, 1)
    nu = int(round(slope))
    if nu < 1 or abs(slope - nu) > ORDER_SLOPE_TOL:
        raise OrderIndeterminateError(
            f"fitted slope {slope:.4f} near t={tau} is not an integer order")
    resid = float(np.sqrt(np.mean((y - (intercept + slope * x)) ** 2)))
    residual = resid / (1.0 + resid)

    # leading coefficient from the closest usable probes on each side
    h_sides = []
    for side in (+1.0, -1.0):
        m = keep & (np.sign(signed) == side)
        if not np.any(m):
            continue
        idx = np.argsort(dists[m])[:3]
        sd = signed[m][idx]
        sv = vals[m][idx]
        h_sides.append(float(np.mean(sv / sd ** nu)))
    h = float(np.mean(h_sides))
    endpoint = (w_left <= 0.0) or (w_right <= 0.0)

    if mode == "h":
        if nu != 2:
            raise OrderIndeterminateError(
                f"tall-mode zero at t={tau} has order {nu}, need 2")
        if h <= 0.0:
            raise NotPositiveSemidefiniteError(
                f"tall-mode coefficient {h} at t={tau} is not positive")
        h = math.sqrt(h)
    return ZeroRecord(float(tau), nu, h, residual, float(window), endpoint)


@dataclass(frozen=True)
class ObservationSet:
    """Observation points with their order vector.

    ``points`` always include 0 and T.  ``orders[k]`` is the order entry
    for points[k]: 0 at a non-vanishing endpoint; in square mode the fitted
    determinant order at a zero; in tall mode 1 at every rank-drop point
    (the mininorm vanishes linearly there).  ``records`` holds the fit
    record per point (None where the determinant does not vanish).
    """

    mode: str
    points: tuple
    orders: tuple
    records: tuple = field(repr=False)
    det_scale: float = 0.0

    def __post_init__(self):
        if len(self.points) < 2:
            raise InvalidInputError("observation set needs at least 0 and T")
        for k, (o, r) in enumerate(zip(self.orders, self.records)):
            if (o == 0) != (r is None):
                raise PartitionInconsistencyError(
                    f"order/record mismatch at point {self.points[k]}")

    def intervals(self):
        """Consecutive observation intervals as (index, tau, theta)."""
        return [(k, self.points[k], self.points[k + 1])
                for k in range(len(self.points) - 1)]


def observation_set_from_path(path, mode, bracket_tol=None, touch_tol=None):
    """Observation set of an explicit sensitivity path (see observation_set)."""
    if mode not in ("k", "h"):
        raise InvalidInputError(f"mode must be 'k' or 'h', not {mode!r}")
    if mode == "k" and path.n != path.l:
        raise InvalidInputError(
            f"square mode needs n == l, got n={path.n}, l={path.l}")
    if mode == "h" and path.l > path.n:
        raise InvalidInputError(
            f"tall mode needs l <= n, got n={path.n}, l={path.l}")
    grid = path.grid

    def g_fn(t):
        return path.det_at(t, mode)

    det_grid = path.det_path(mode)
    gscale = float(np.max(np.abs(det_grid)))
    zeros = find_zeros(g_fn, grid, mode=mode, bracket_tol=bracket_tol,
                       touch_tol=touch_tol)

    points = [grid.a, grid.b]
    for z in zeros:
        if z not in points:
            points.append(z)
    points.sort()

    orders, records = [], []
    for k, pt in enumerate(points):
        if pt not in zeros:
            orders.append(0)
            records.append(None)
            continue
        gaps = [abs(pt - q) for q in points if q != pt]
        window = min(WINDOW_FACTOR * grid.span, 0.5 * min(gaps))
        rec = estimate_order(g_fn, pt, window, grid.a, grid.b, mode=mode,
                             gscale=gscale)
        orders.append(1 if mode == "h" else rec.nu)
        records.append(rec)
    return ObservationSet(mode, tuple(points), tuple(orders), tuple(records),
                          det_scale=gscale)


def observation_set(system, p0, mode="auto", grid=None, tol=None, path=None):
    """Observation points and orders for a system's determinant path.

    Parameters
    ----------
    system : SystemModel
    p0 : ParamFunction
    mode : str
        "k" (needs l == n), "h" (needs l <= n), or "auto" (k when l == n).
    grid : TimeGrid, optional
        Defaults to the uniform 2001-point grid on [0, T].
    tol : float, optional
        Integrator tolerance for the reference trajectory.
    path : SensitivityPath, optional
        Reuse a precomputed path.

    Returns
    -------
    ObservationSet
    """
    if mode == "auto":
        mode = "k" if system.n == system.l else "h"
    if path is None:
        kwargs = {} if tol is None else {"tol": tol}
        if grid is None:
            grid = TimeGrid.uniform(0.0, system.T, DEFAULT_GRID_POINTS)
        path = sensitivity_path(system, p0, grid=grid, **kwargs)
    return observation_set_from_path(path, mode)
