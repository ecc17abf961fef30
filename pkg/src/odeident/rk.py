"""Adaptive Dormand-Prince 5(4) integrator with dense output.

One explicit embedded pair drives every integration in the package:
trajectories, fundamental matrices, and perturbed re-based segments.  Step
size is controlled by the classic PI controller (limiter constants 0.2 and
10, safety 0.9, beta 0.04); accepted steps store their stage values so the
solution can be evaluated anywhere via the standard quartic interpolant.

The single ``tol`` argument is used as both absolute and relative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationFailureError, InvalidInputError

DEFAULT_TOL = 1e-10
MAX_STEPS = 1_000_000

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])

_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)

_B = _A[6]  # fifth-order weights; first-same-as-last pair

# Difference between the 5th- and 4th-order weights, for the error estimate.
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])

# Dense-output polynomial coefficients: q_s(theta) = sum_j P[s, j] theta^(j+1).
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423,
     69997945 / 29380423],
])

_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2   # largest allowed step shrink per step is 1/0.2
_FAC_MAX = 10.0  # largest allowed step growth per step


@dataclass
class DenseSolution:
    """Piecewise-quartic interpolant of one integration run."""

    ts: np.ndarray
    ys: np.ndarray
    stages: list = field(repr=False)
    n_rhs: int = 0

    @property
    def t0(self):
        return float(self.ts[0])

    @property
    def t1(self):
        return float(self.ts[-1])

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """Solution value at ``t``; exact at step nodes."""
        ts = self.ts
        pad = 1e-12 * max(1.0, abs(self.t1 - self.t0))
        if t < ts[0] - pad or t > ts[-1] + pad:
            raise InvalidInputError(
                f"t={t} outside integration range [{ts[0]}, {ts[-1]}]")
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        if t == ts[i]:
            return self.ys[i].copy()
        if t == ts[i + 1]:
            return self.ys[i + 1].copy()
        h = ts[i + 1] - ts[i]
        theta = (t - ts[i]) / h
        powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
        q = self.stages[i].T @ (_P @ powers)
        return self.ys[i] + h * q


def _error_norm(err_vec, y_old, y_new, tol):
    sc = tol + tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err_vec / sc) ** 2)))


def _initial_step(f, t0, y0, f0, t_end, tol):
    span = t_end - t0
    sk = tol + tol * np.abs(y0)
    dnf = float(np.sum((f0 / sk) ** 2))
    dny = float(np.sum((y0 / sk) ** 2))
    if dnf <= 1e-10 or dny <= 1e-10:
        h = 1e-6
    else:
        h = 0.01 * np.sqrt(dny / dnf)
    h = min(h, span)
    y1 = y0 + h * f0
    f1 = f(t0 + h, y1)
    der2 = float(np.sqrt(np.sum(((f1 - f0) / sk) ** 2))) / h
    der12 = max(der2, np.sqrt(dnf))
    if der12 <= 1e-15:
        h1 = max(1e-6, h * 1e-3)
    else:
        h1 = (0.01 / der12) ** 0.2
    return min(100.0 * h, h1, span)


def integrate(f, t0, t1, y0, tol=DEFAULT_TOL, max_steps=MAX_STEPS):
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1 > t0``.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, y) -> array``.
    t0, t1 : float
        Integration window, ``t1 > t0``.
    y0 : array_like
        Initial state at ``t0``.
    tol : float
        Absolute and relative local error tolerance.

    Returns
    -------
    DenseSolution
        Interpolable solution over [t0, t1].

    Raises
    ------
    IntegrationFailureError
        On step underflow, non-finite values, or step-count exhaustion.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if not t1 > t0:
        raise InvalidInputError(f"need t1 > t0, got [{t0}, {t1}]")
    if not (np.all(np.isfinite(y0)) and np.isfinite(t0) and np.isfinite(t1)):
        raise InvalidInputError("non-finite initial data")
    if not tol > 0.0:
        raise InvalidInputError("tol must be positive")

    fn = _SafeRhs(f, y0.size)
    t = t0
    y = y0.copy()
    k1 = fn(t, y)
    h = _initial_step(fn, t0, y, k1, t1, tol)
    h_floor = 1e-14 * max(1.0, abs(t1 - t0))

    ts = [t0]
    ys = [y0.copy()]
    stages = []
    facold = 1e-4
    k = np.empty((7, y0.size))

    done = False
    for _ in range(max_steps):
        if done:
            break
        last = (t1 - t) - h <= h_floor
        if last:
            h = t1 - t
        if h < h_floor:
            raise IntegrationFailureError(
                f"step size underflow at t={t} (h={h})")
        k[0] = k1
        for s in range(1, 7):
            ys_s = y + h * (_A[s, :s] @ k[:s])
            k[s] = fn(t + _C[s] * h, ys_s)
        y_new = ys_s  # stage 7 argument equals the 5th-order solution
        err_vec = h * (_E @ k)
        err = _error_norm(err_vec, y, y_new, tol)

        fac11 = err ** _EXPO1 if err > 0.0 else 0.0
        if err <= 1.0:
            # accept
            t = t1 if last else t + h
            done = last
            ts.append(t)
            ys.append(y_new.copy())
            stages.append(k.copy())
            facold = max(err, 1e-4)
            y = y_new.copy()
            k1 = k[6].copy()  # first-same-as-last
            fac = fac11 / facold ** _BETA
            fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFE))
            h = h / fac
        else:
            h = h / min(1.0 / _FAC_MIN, fac11 / _SAFE)
    else:
        raise IntegrationFailureError(
            f"maximum step count {max_steps} exceeded at t={t}")

    sol = DenseSolution(np.array(ts), np.array(ys), stages, fn.calls)
    return sol


class _SafeRhs:
    """Wraps a right-hand side with shape/finiteness checks and a call count."""

    def __init__(self, f, n):
        self._f = f
        self._n = n
        self.calls = 0

    def __call__(self, t, y):
        self.calls += 1
        try:
            v = np.atleast_1d(np.asarray(self._f(t, y), dtype=float))
        except (OverflowError, ZeroDivisionError, FloatingPointError) as exc:
            raise IntegrationFailureError(
                f"rhs evaluation failed at t={t}: {exc}") from exc
        if v.shape != (self._n,):
            raise InvalidInputError(
                f"rhs returned shape {v.shape}, expected ({self._n},)")
        if not np.all(np.isfinite(v)):
            raise IntegrationFailureError(
                f"rhs returned non-finite values at t={t}")
        return v
