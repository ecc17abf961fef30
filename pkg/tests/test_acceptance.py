"""Acceptance gate: ten end-to-end checks against closed-form oracles.

One test per criterion, named ``test_criterion_NN_<label>``.  Each prints
a ``CRITERION NN [label]: PASS/FAIL`` line; conftest.py repeats the
verdicts in the terminal summary so they survive output capture.  Every
tolerance is pinned inline next to the assertion it guards.
"""

import json
import math
from contextlib import contextmanager

import numpy as np
import pytest

from odeident.certify import (certify_membership, mininorm_path,
                              perturb_within_class)
from odeident.cli import main as cli_main
from odeident.core import TimeGrid
from odeident.errors import OrderIndeterminateError
from odeident.identifiability import (identifiability_experiment,
                                      negative_control, scalar_profile)
from odeident.jsonio import dumps
from odeident.linalg import (adjugate, determinant, singular_values,
                             sym_eigenvalues)
from odeident.ode import fundamental_matrix
from odeident.registry import SystemSpec, get_system
from odeident.sensitivity import (SensitivityPath, psi_map, remainder,
                                  sensitivity_path)
from odeident.zerofinder import observation_set, observation_set_from_path

EPS_GRID = (1e-1, 1e-2, 1e-3)
POLY_DIRECTIONS = ("1", "t", "t - 0.5", "(t - 0.5)^2")


@contextmanager
def _criterion(number, label):
    try:
        yield
    except BaseException:
        print(f"CRITERION {number:02d} [{label}]: FAIL")
        raise
    print(f"CRITERION {number:02d} [{label}]: PASS")


def _build(name):
    system, p0 = get_system(name).build()
    path = sensitivity_path(system, p0)
    return system, p0, path


def test_criterion_01_remainder_contraction():
    """Linearization residual decays like o(eps); vanishes on a linear system."""
    with _criterion(1, "remainder-contraction"):
        system, p0, path = _build("nonlinear")
        Y = fundamental_matrix(system, path.ref, 0.0)
        one = scalar_profile("1")
        ratios = {}
        for eps in (1e-2, 1e-3):
            p = p0.add_scaled(one, eps)
            sample = remainder(system, p0, p, 0.0, 1.0,
                               ref=path.ref, path=path, Y=Y)
            ratios[eps] = sample.ratio
        assert ratios[1e-3] <= 0.25 * ratios[1e-2]

        system, p0, path = _build("affine")
        Y = fundamental_matrix(system, path.ref, 0.0)
        p = p0.add_scaled(one, 1e-1)
        sample = remainder(system, p0, p, 0.0, 1.0,
                           ref=path.ref, path=path, Y=Y)
        assert sample.g_norm <= 1e-6


def _slope_matches(measured, predicted):
    return abs(measured - predicted) <= 1e-3 * (1.0 + abs(measured))


def test_criterion_02_rank_drop_slopes():
    """One-sided mininorm slopes at rank drops equal h / sqrt(Lambda)."""
    with _criterion(2, "rank-drop-slopes"):
        # builtin tall systems: slopes sqrt(2) and 1
        for name, pred in (("tall-rank-drop", math.sqrt(2.0)),
                           ("tall-mixed", 1.0)):
            system, p0, path = _build(name)
            obs = observation_set(system, p0, path=path)
            mn = mininorm_path(path, obs)
            assert len(mn.drops) == 1
            drop = mn.drops[0]
            assert _slope_matches(drop.slope_right, drop.predicted_slope)
            assert _slope_matches(drop.slope_left, -drop.predicted_slope)
            assert drop.predicted_slope == pytest.approx(pred, rel=2e-2)

        # scalar system re-run on the Gram route: slope 1 on both sides
        system, p0, path = _build("simple-zero")
        obs = observation_set(system, p0, mode="h", path=path)
        drop = mininorm_path(path, obs).drops[0]
        assert _slope_matches(drop.slope_right, drop.predicted_slope)
        assert _slope_matches(drop.slope_left, -drop.predicted_slope)
        assert drop.predicted_slope == pytest.approx(1.0, rel=2e-2)

        # synthetic matrix paths; the t = 0 drops are one-sided
        grid = TimeGrid.uniform(0.0, 1.0, 2001)
        cases = (
            (lambda t: np.array([[t], [t]]), math.sqrt(2.0)),
            (lambda t: np.diag([t, 1.0]), 1.0),
            (lambda t: np.array([[t, 0.0], [0.0, 1.0], [0.0, 0.0]]), 1.0),
        )
        for fn, pred in cases:
            path = SensitivityPath.from_matrix_function(fn, grid)
            obs = observation_set_from_path(path, "h")
            drop = mininorm_path(path, obs).drops[0]
            assert drop.c == 0.0
            assert drop.slope_left is None
            assert _slope_matches(drop.slope_right, drop.predicted_slope)
            assert drop.predicted_slope == pytest.approx(pred, rel=2e-2)

        # an order-4 Gram zero admits no slope fit and must be refused
        system, p0, _ = _build("double-zero")
        with pytest.raises(OrderIndeterminateError):
            observation_set(system, p0, mode="h")


def test_criterion_03_observation_sets():
    """Zero locations, orders, and leading coefficients of the builtins."""
    with _criterion(3, "observation-sets"):
        system, p0, path = _build("simple-zero")
        obs = observation_set(system, p0, path=path)
        assert obs.points[0] == 0.0 and obs.points[-1] == 1.0
        assert len(obs.points) == 3
        assert abs(obs.points[1] - 0.5) <= 1e-6
        assert obs.orders == (0, 1, 0)

        system, p0, path = _build("double-zero")
        obs = observation_set(system, p0, path=path)
        rec = obs.records[1]
        assert rec.nu == 2
        assert abs(rec.h - 1.0) <= 2e-2

        system, p0, path = _build("tall-rank-drop")
        obs = observation_set(system, p0, path=path)
        assert obs.mode == "h"
        assert abs(obs.points[1] - 0.5) <= 1e-6
        assert abs(obs.records[1].h - math.sqrt(2.0)) <= 2e-2


def _sweep(name, dim=1):
    system, p0, path = _build(name)
    directions = [scalar_profile(text, dim=dim, axis=0)
                  for text in POLY_DIRECTIONS]
    return identifiability_experiment(system, p0, directions,
                                      eps_grid=EPS_GRID, path=path)


def test_criterion_04_square_mode_sweep():
    """Certified perturbations of the square systems are all distinguished."""
    with _criterion(4, "square-mode-sweep"):
        for name in ("simple-zero", "double-zero"):
            report = _sweep(name)
            assert report.counterexamples == ()
            assert len(report.rows) == 12
            for row in report.rows:
                if row.certified:
                    assert row.distinguished
            assert report.n_certified >= 1


def test_criterion_05_tall_mode_sweep():
    """Same protocol on the tall systems (Gram-determinant route)."""
    with _criterion(5, "tall-mode-sweep"):
        for name, dim in (("tall-rank-drop", 1), ("tall-mixed", 2)):
            report = _sweep(name, dim=dim)
            assert report.counterexamples == ()
            for row in report.rows:
                if row.certified:
                    assert row.distinguished
            assert report.n_certified >= 1


def test_criterion_06_negative_control():
    """Dropping interior observation points hides exactly the right directions."""
    with _criterion(6, "negative-control"):
        # constant drive is invisible at t = 1 but shows up at t = 0.5
        system, p0 = get_system("simple-zero").build()
        nc = negative_control(system, p0, [1.0],
                              directions=[scalar_profile("1")], eps=1e-1)
        row = nc.rows[0]
        assert row.reduced_separation <= 1e-8
        assert row.indistinguishable_at_reduced
        assert row.distinguished_at_full
        assert abs(row.full_witness - 0.5) <= 1e-6
        assert abs(row.full_separation - 1e-1 / 8.0) <= 1e-6

        # a full-period sine integrates to zero: invisible everywhere
        system, p0 = get_system("no-zero").build()
        sine = scalar_profile("sin(6.283185307179586 * t)")
        nc = negative_control(system, p0, [1.0], directions=[sine], eps=1e-1)
        row = nc.rows[0]
        assert row.reduced_separation <= 1e-8
        assert row.full_separation <= 1e-8
        assert not row.distinguished_at_full


def test_criterion_07_linear_algebra_oracles():
    """Dual-route identities over 1000 random small matrices."""
    with _criterion(7, "linear-algebra-oracles"):
        rng = np.random.default_rng(20240817)
        for _ in range(1000):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 6))
            a = rng.standard_normal((n, m))
            # a wide matrix has min(n, m) singular values; the Gram
            # spectrum carries m - n structural zeros on top
            sq = np.zeros(m)
            sq[m - min(n, m):] = np.sort(singular_values(a)) ** 2
            eigs = np.sort(sym_eigenvalues(a.T @ a))
            scale = max(1.0, float(eigs[-1]))
            assert np.max(np.abs(sq - eigs)) <= 1e-8 * scale

            k = int(rng.integers(1, 5))
            b = rng.standard_normal((k, k))
            det_lu = determinant(b)
            det_cof = float(np.trace(b @ adjugate(b))) / k
            assert abs(det_lu - det_cof) <= 1e-10

            j = int(rng.integers(1, 6))
            c = rng.standard_normal((j, j))
            resid = c @ adjugate(c) - determinant(c) * np.eye(j)
            assert np.max(np.abs(resid)) <= 1e-10


def test_criterion_08_psi_closed_forms():
    """The first-order response map against hand-integrable systems."""
    with _criterion(8, "psi-closed-forms"):
        one = scalar_profile("1")
        oracle = {
            "no-zero": 1.0,              # integral of 1
            "affine": 1.0 - math.exp(-1.0),   # integral of exp(-s)
        }
        for name, expected in oracle.items():
            system, p0, path = _build(name)
            Y = fundamental_matrix(system, path.ref, 0.0)
            psi = psi_map(path, Y, 0.0, 1.0, one)
            assert abs(float(psi.value[0]) - expected) <= 1e-7

        spec = SystemSpec.from_dict({
            "name": "scaled-drive", "n": 1, "l": 1, "T": 1.0,
            "x0": [0.0], "rhs": ["t * p0"], "p0": ["0"], "mode": "k",
        })
        system, p0 = spec.build()
        path = sensitivity_path(system, p0)
        Y = fundamental_matrix(system, path.ref, 0.0)
        psi = psi_map(path, Y, 0.0, 1.0, one)
        assert abs(float(psi.value[0]) - 0.5) <= 1e-7


def test_criterion_09_class_preserving_perturbation():
    """perturb_within_class output re-certifies inside the inherited envelope."""
    with _criterion(9, "class-preserving-perturbation"):
        for name in ("no-zero", "simple-zero"):
            system, p0, path = _build(name)
            obs = observation_set(system, p0, path=path)
            Y = fundamental_matrix(system, path.ref, obs.points[0])
            p = p0.add_scaled(scalar_profile("1"), 1e-1)
            cert = certify_membership(system, obs, p, p0, 0, path=path, Y=Y)
            assert cert.passed
            p_new, inherited = perturb_within_class(
                cert, path, Y, p, p0, scalar_profile("t"))
            again = certify_membership(system, obs, p_new, p0, 0,
                                       path=path, Y=Y)
            assert again.passed
            assert again.alpha >= cert.alpha / 4.0 - 1e-12
            assert again.beta >= cert.beta / 4.0 - 1e-12
            assert again.kappa <= 4.0 * cert.kappa + 1e-12
            assert inherited.alpha == pytest.approx(cert.alpha / 4.0)
            assert inherited.beta == pytest.approx(cert.beta / 4.0)
            assert inherited.kappa == pytest.approx(4.0 * cert.kappa)


def test_criterion_10_deterministic_reports(tmp_path):
    """Two analysis runs agree byte for byte once timings are removed."""
    with _criterion(10, "deterministic-reports"):
        texts = []
        for i in range(2):
            out = tmp_path / f"report{i}.json"
            rc = cli_main(["analyze", "--system", "simple-zero",
                           "--out", str(out)])
            assert rc == 0
            d = json.loads(out.read_text())
            d.pop("timings")
            texts.append(dumps(d))
        assert texts[0] == texts[1]
