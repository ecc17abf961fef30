"""Command line interface.

Subcommands
-----------
analyze        full pipeline, JSON report or (t, det, muA) CSV
theta          observation points and zero orders only
check-class    class membership certificates for one direction
distinguish    compare two explicit parameter functions
sweep          direction x epsilon certification/separation table
mininorm-path  smallest singular value along the trajectory (h mode)
list-systems   builtin system names

Exit codes: 0 success, 1 analysis failure, 2 bad input or configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import rk
from .certify import certify_membership, mininorm_path
from .core import DEFAULT_GRID_POINTS, TimeGrid
from .errors import (ConfigError, InvalidInputError, NumericalError,
                     OdeidentError, StageError)
from .identifiability import distinguish
from .jsonio import csv_text, dumps
from .pipeline import AnalysisConfig, parse_config, run_pipeline
from .registry import get_system, list_systems
from .sensitivity import sensitivity_path
from .zerofinder import observation_set


def _add_common(p, with_mode=True):
    p.add_argument("--system", help="builtin system name")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_POINTS,
                   help="grid points (default %(default)s)")
    p.add_argument("--tol", type=float, default=rk.DEFAULT_TOL,
                   help="integrator tolerance (default %(default)s)")
    if with_mode:
        p.add_argument("--mode", choices=("k", "h", "auto"), default="auto",
                       help="determinant mode (default auto)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   dest="fmt", help="output format (default json)")


def _parse_directions(texts, l):
    """Repeatable --direction flags; each must carry l comma-free exprs."""
    if len(texts) != l:
        raise InvalidInputError(
            f"--direction must be given {l} times "
            f"(one expression per parameter coordinate), got {len(texts)}")
    return tuple(texts)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="odeident",
        description="Local identifiability analysis of time-varying "
                    "parameter functions in ODE systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full pipeline")
    _add_common(p)
    p.add_argument("--eps", default=None,
                   help="comma list of perturbation sizes")
    p.add_argument("--reduced-points", default=None,
                   help="comma list of observation times for the "
                        "negative control")

    p = sub.add_parser("theta", help="observation points and zero orders")
    _add_common(p)

    p = sub.add_parser("check-class", help="certify one direction")
    _add_common(p)
    p.add_argument("--direction", action="append", default=[],
                   help="direction expression, repeat per coordinate")
    p.add_argument("--eps", default="1e-1",
                   help="comma list of perturbation sizes")

    p = sub.add_parser("distinguish",
                       help="compare two explicit parameter functions")
    _add_common(p)
    p.add_argument("--p1", action="append", default=[],
                   help="first function, one expression per coordinate")
    p.add_argument("--p2", action="append", default=[],
                   help="second function, one expression per coordinate")

    p = sub.add_parser("sweep", help="direction x epsilon table")
    _add_common(p)
    p.add_argument("--eps", default=None,
                   help="comma list of perturbation sizes")
    p.add_argument("--direction", action="append", default=None,
                   help="direction expressions (repeat per coordinate, "
                        "then per direction); default builtin family")

    p = sub.add_parser("mininorm-path",
                       help="smallest singular value along the path")
    _add_common(p, with_mode=False)

    p = sub.add_parser("list-systems", help="builtin systems")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   dest="fmt")

    return parser


def _load_config(args, eps=None, reduced=None):
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        cfg = parse_config(data)
        # explicit flags override file values only when non-default
        overrides = {}
        if args.grid != DEFAULT_GRID_POINTS:
            overrides["grid_n"] = args.grid
        if args.tol != rk.DEFAULT_TOL:
            overrides["tol"] = args.tol
        if getattr(args, "mode", "auto") != "auto":
            overrides["mode"] = args.mode
        if eps is not None:
            overrides["eps_grid"] = eps
        if reduced is not None:
            overrides["reduced_points"] = reduced
        if overrides:
            from dataclasses import replace
            cfg = replace(cfg, **overrides)
        return cfg
    if not args.system:
        raise ConfigError("either --system or --config is required")
    return AnalysisConfig(
        spec=get_system(args.system),
        grid_n=args.grid,
        tol=args.tol,
        mode=getattr(args, "mode", None),
        eps_grid=eps if eps is not None else (1e-1, 1e-2, 1e-3),
        reduced_points=reduced,
    )


def _parse_eps(text):
    if text is None:
        return None
    try:
        values = tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --eps list {text!r}") from exc
    if not values:
        raise ConfigError("--eps list is empty")
    return values


def _parse_times(text):
    if text is None:
        return None
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad time list {text!r}") from exc


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        # surface a broken pipe here, inside main's handler, instead of
        # at the interpreter's shutdown flush
        sys.stdout.flush()


def _path_csv(report):
    return csv_text(("t", "det", "muA"), report.path_table())


def _cmd_analyze(args):
    cfg = _load_config(args, eps=_parse_eps(args.eps),
                       reduced=_parse_times(args.reduced_points))
    report = run_pipeline(cfg)
    if args.fmt == "csv":
        _emit(args, _path_csv(report))
    else:
        _emit(args, dumps(report.to_dict()))
    return 0


def _cmd_theta(args):
    cfg = _load_config(args)
    system, p0 = cfg.spec.build()
    grid = TimeGrid.uniform(0.0, system.T, cfg.grid_n)
    path = sensitivity_path(system, p0, grid=grid, tol=cfg.tol)
    obs = observation_set(system, p0, mode=cfg.resolved_mode, path=path)
    if args.fmt == "csv":
        rows = []
        for pt, order, rec in zip(obs.points, obs.orders, obs.records):
            if rec is None:
                rows.append((pt, order, None, None, None))
            else:
                rows.append((pt, order, rec.h, rec.residual, rec.window))
        _emit(args, csv_text(
            ("point", "order", "coefficient", "residual", "window"), rows))
    else:
        records = []
        for pt, order, rec in zip(obs.points, obs.orders, obs.records):
            entry = {"point": pt, "order": order}
            if rec is not None:
                entry.update({"fit_order": rec.nu, "coefficient": rec.h,
                              "residual": rec.residual, "window": rec.window,
                              "endpoint": rec.endpoint})
            records.append(entry)
        _emit(args, dumps({"mode": obs.mode, "points": list(obs.points),
                           "orders": list(obs.orders), "records": records}))
    return 0


def _direction_function(system, texts):
    from .expressions import parse_expression
    from .ode import ParamFunction
    exprs = [parse_expression(s, 0, 0) for s in texts]
    dexprs = [e.diff_t() for e in exprs]

    def ev(t):
        return np.array([e.eval(t) for e in exprs])

    def dv(t):
        return np.array([e.eval(t) for e in dexprs])

    desc = ", ".join(e.canonical() for e in exprs)
    return ParamFunction(ev, dv, system.l, description=desc,
                         domain=(0.0, system.T), validate=False)


def _cmd_check_class(args):
    cfg = _load_config(args)
    system, p0 = cfg.spec.build()
    texts = _parse_directions(args.direction, system.l)
    q = _direction_function(system, texts)
    eps_list = _parse_eps(args.eps)
    grid = TimeGrid.uniform(0.0, system.T, cfg.grid_n)
    path = sensitivity_path(system, p0, grid=grid, tol=cfg.tol)
    obs = observation_set(system, p0, mode=cfg.resolved_mode, path=path)
    certs = []
    for eps in eps_list:
        p = p0.add_scaled(q, eps)
        for k in range(len(obs.points) - 1):
            cert = certify_membership(system, obs, p, p0, k,
                                      path=path, tol=cfg.tol)
            certs.append({"direction": q.description, "eps": eps,
                          **cert.to_dict()})
    if args.fmt == "csv":
        header = ("direction", "eps", "interval", "tau", "theta", "variant",
                  "alpha", "beta", "gamma", "kappa", "order", "passed",
                  "failure_reason")
        rows = [(c["direction"], c["eps"], c["interval_index"], c["tau"],
                 c["theta"], c["variant"], c["alpha"], c["beta"], c["gamma"],
                 c["kappa"], c["nu"], c["passed"], c["failure_reason"])
                for c in certs]
        _emit(args, csv_text(header, rows))
    else:
        _emit(args, dumps({"certificates": certs}))
    return 0


def _cmd_distinguish(args):
    cfg = _load_config(args)
    system, p0 = cfg.spec.build()
    f1 = _direction_function(system, _parse_directions(args.p1, system.l))
    f2 = _direction_function(system, _parse_directions(args.p2, system.l))
    obs = observation_set(system, p0, mode=cfg.resolved_mode,
                          grid=TimeGrid.uniform(0.0, system.T, cfg.grid_n),
                          tol=cfg.tol)
    verdict = distinguish(system, f1, f2, obs.points, integrator_tol=cfg.tol)
    if args.fmt == "csv":
        rows = [(pt, sep) for pt, sep in verdict.per_point]
        _emit(args, csv_text(("theta", "separation"), rows))
    else:
        _emit(args, dumps(verdict.to_dict()))
    return 0


def _cmd_sweep(args):
    directions = None
    if args.direction:
        cfg0 = _load_config(args)
        l = cfg0.spec.l
        if len(args.direction) % l != 0:
            raise ConfigError(
                f"--direction count must be a multiple of {l}")
        directions = tuple(
            tuple(args.direction[i:i + l])
            for i in range(0, len(args.direction), l))
    cfg = _load_config(args, eps=_parse_eps(args.eps))
    if directions is not None:
        from dataclasses import replace
        cfg = replace(cfg, directions=directions)
    report = run_pipeline(cfg)
    exp = report.experiment
    if args.fmt == "csv":
        header = ("direction", "eps", "certified", "distinguished",
                  "separation", "witness")
        rows = [(r.direction, r.eps, r.certified, r.distinguished,
                 r.separation, r.witness) for r in exp.rows]
        _emit(args, csv_text(header, rows))
    else:
        _emit(args, dumps(exp.to_dict()))
    return 0


def _cmd_mininorm_path(args):
    cfg = _load_config(args)
    system, p0 = cfg.spec.build()
    grid = TimeGrid.uniform(0.0, system.T, cfg.grid_n)
    path = sensitivity_path(system, p0, grid=grid, tol=cfg.tol)
    obs = None
    if system.l <= system.n:
        try:
            obs = observation_set(system, p0, mode="h", path=path)
        except OdeidentError:
            obs = None
    mn = mininorm_path(path, obs)
    if args.fmt == "csv":
        rows = [(float(t), float(m))
                for t, m in zip(grid.points, mn.mu_values)]
        _emit(args, csv_text(("t", "muA"), rows))
    else:
        payload = {
            "mu_min": float(np.min(mn.mu_values)),
            "mu_max": float(np.max(mn.mu_values)),
            "rank_drops": [d.to_dict() for d in mn.drops],
        }
        _emit(args, dumps(payload))
    return 0


def _cmd_list_systems(args):
    entries = list_systems()
    if args.fmt == "csv":
        _emit(args, csv_text(("name", "description"), entries))
    else:
        _emit(args, dumps([{"name": n, "description": d}
                           for n, d in entries]))
    return 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "theta": _cmd_theta,
    "check-class": _cmd_check_class,
    "distinguish": _cmd_distinguish,
    "sweep": _cmd_sweep,
    "mininorm-path": _cmd_mininorm_path,
    "list-systems": _cmd_list_systems,
}


def _exit_code(exc):
    cause = exc.original if isinstance(exc, StageError) else exc
    if isinstance(cause, (ConfigError, InvalidInputError)):
        return 2
    if isinstance(cause, NumericalError):
        return 3
    return 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error at stage '{exc.stage}': {exc.original}",
              file=sys.stderr)
        return _exit_code(exc)
    except OdeidentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON configuration: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream consumer (e.g. head) closed the pipe; silence the
        # interpreter's shutdown complaint about the unflushable stdout
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    sys.exit(main())
