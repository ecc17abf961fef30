"""End-to-end analysis pipeline and its configuration schema.

A configuration (CLI flags or a JSON file, ``schema_version`` 1) names a
system, grid density, integrator tolerance, determinant mode, direction
family, and epsilon grid.  ``run_pipeline`` executes the stages

    build -> trajectory -> sensitivity -> observation -> mininorm
          -> experiment -> negative-control

wrapping any library error with the stage name, and returns an
:class:`AnalysisReport` whose JSON form is byte-stable across runs except
for the ``timings`` block.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, rk
from .certify import mininorm_path
from .core import DEFAULT_GRID_POINTS, TimeGrid
from .errors import ConfigError, OdeidentError, StageError
from .expressions import parse_expression
from .identifiability import (DEFAULT_EPS_GRID, direction_family,
                              identifiability_experiment, negative_control)
from .ode import ParamFunction, integrate_trajectory
from .registry import SCHEMA_VERSION, SystemSpec, get_system
from .sensitivity import sensitivity_path
from .zerofinder import (BRACKET_TOL_FACTOR, TOUCH_TOL_FACTOR,
                         observation_set)

_VERSION = "0.1.0"


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated pipeline configuration."""

    spec: SystemSpec
    grid_n: int = DEFAULT_GRID_POINTS
    tol: float = rk.DEFAULT_TOL
    mode: str = None            # overrides the spec's mode when given
    eps_grid: tuple = DEFAULT_EPS_GRID
    directions: tuple = None    # tuple of expression tuples, or None
    reduced_points: tuple = None

    def __post_init__(self):
        if self.grid_n < 3:
            raise ConfigError("grid must have at least 3 points")
        if not self.tol > 0.0:
            raise ConfigError("tol must be positive")
        if self.mode is not None and self.mode not in ("k", "h", "auto"):
            raise ConfigError(f"mode must be k, h, or auto, not {self.mode!r}")
        if any(float(e) <= 0.0 for e in self.eps_grid):
            raise ConfigError("eps values must be strictly positive")
        object.__setattr__(self, "eps_grid",
                           tuple(float(e) for e in self.eps_grid))

    @property
    def resolved_mode(self):
        if self.mode is not None and self.mode != "auto":
            return self.mode
        return self.spec.resolved_mode


def parse_config(data):
    """Build an :class:`AnalysisConfig` from a JSON-compatible dict."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    allowed = {"schema_version", "system", "grid", "tol", "mode", "eps",
               "directions", "reduced_points"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    sys_entry = data.get("system")
    if isinstance(sys_entry, str):
        spec = get_system(sys_entry)
    elif isinstance(sys_entry, dict):
        if set(sys_entry) == {"name"}:
            spec = get_system(sys_entry["name"])
        else:
            spec = SystemSpec.from_dict(sys_entry)
    else:
        raise ConfigError("configuration needs a 'system' entry "
                          "(builtin name or full spec)")
    directions = data.get("directions")
    if directions is not None:
        directions = tuple(tuple(str(s) for s in d) for d in directions)
        for d in directions:
            if len(d) != spec.l:
                raise ConfigError(
                    f"direction {list(d)} has {len(d)} coordinates, "
                    f"expected {spec.l}")
    reduced = data.get("reduced_points")
    if reduced is not None:
        reduced = tuple(float(t) for t in reduced)
    return AnalysisConfig(
        spec=spec,
        grid_n=int(data.get("grid", DEFAULT_GRID_POINTS)),
        tol=float(data.get("tol", rk.DEFAULT_TOL)),
        mode=data.get("mode"),
        eps_grid=tuple(data.get("eps", DEFAULT_EPS_GRID)),
        directions=directions,
        reduced_points=reduced,
    )


def build_directions(config, system):
    """Direction family from the config (default family when unspecified)."""
    if config.directions is None:
        return direction_family(system.l, system.T)
    out = []
    for texts in config.directions:
        exprs = [parse_expression(s, 0, 0) for s in texts]
        dexprs = [e.diff_t() for e in exprs]

        def ev(t, _e=exprs):
            return np.array([e.eval(t) for e in _e])

        def dv(t, _e=dexprs):
            return np.array([e.eval(t) for e in _e])

        desc = ", ".join(e.canonical() for e in exprs)
        out.append(ParamFunction(ev, dv, system.l, description=desc,
                                 domain=(0.0, system.T), validate=False))
    return out


class _Stages:
    """Stage runner that attributes errors and collects wall times."""

    def __init__(self):
        self.timings = {}

    def run(self, name, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except OdeidentError as exc:
            raise StageError(name, exc) from exc
        finally:
            self.timings[name] = time.perf_counter() - start


@dataclass(frozen=True)
class AnalysisReport:
    """Full pipeline output; ``to_dict`` is the JSON payload."""

    config: AnalysisConfig
    mode: str
    grid: TimeGrid
    obs: object
    det_values: np.ndarray = field(repr=False)
    mu_values: np.ndarray = field(repr=False)
    mininorm: object = None
    experiment: object = None
    control: object = None
    timings: dict = field(default_factory=dict)

    def path_table(self):
        """(t, det, muA) rows for CSV emission."""
        return [(float(t), float(d), float(m))
                for t, d, m in zip(self.grid.points, self.det_values,
                                   self.mu_values)]

    def to_dict(self):
        obs = self.obs
        records = []
        for pt, order, rec in zip(obs.points, obs.orders, obs.records):
            entry = {"point": pt, "order": order}
            if rec is not None:
                entry.update({
                    "fit_order": rec.nu,
                    "coefficient": rec.h,
                    "residual": rec.residual,
                    "window": rec.window,
                    "endpoint": rec.endpoint,
                })
            records.append(entry)
        det = np.asarray(self.det_values)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "generator": f"odeident {_VERSION}",
            "backend": _kernels.BACKEND,
            "system": self.config.spec.to_dict(),
            "mode": self.mode,
            "grid": {"n": len(self.grid), "a": self.grid.a, "b": self.grid.b},
            "tolerances": {
                "integrator": self.config.tol,
                "bracket": BRACKET_TOL_FACTOR * self.grid.span,
                "touch_rel": TOUCH_TOL_FACTOR,
                "distinguish": 100.0 * self.config.tol,
            },
            "determinant_summary": {
                "min": float(np.min(det)),
                "max": float(np.max(det)),
                "abs_max": float(np.max(np.abs(det))),
                "zero_count": sum(1 for o in obs.orders if o >= 1),
            },
            "observation_set": {
                "mode": obs.mode,
                "points": list(obs.points),
                "orders": list(obs.orders),
                "records": records,
            },
            "timings": {k: float(v) for k, v in self.timings.items()},
        }
        if self.mininorm is not None:
            payload["mininorm"] = {
                "mu_min": float(np.min(self.mininorm.mu_values)),
                "mu_max": float(np.max(self.mininorm.mu_values)),
                "rank_drops": [d.to_dict() for d in self.mininorm.drops],
            }
        else:
            payload["mininorm"] = None
        if self.experiment is not None:
            payload["experiment"] = self.experiment.to_dict()
            payload["certificates"] = [
                {"direction": d, "eps": e, **cert.to_dict()}
                for d, e, cert in self.experiment.certificates]
        else:
            payload["experiment"] = None
            payload["certificates"] = []
        payload["negative_control"] = (self.control.to_dict()
                                       if self.control is not None else None)
        return payload


def run_pipeline(config):
    """Run the full analysis for one configuration.

    Returns
    -------
    AnalysisReport
    """
    stages = _Stages()
    system, p0 = stages.run("build", config.spec.build)
    grid = TimeGrid.uniform(0.0, system.T, config.grid_n)
    mode = config.resolved_mode

    ref = stages.run("trajectory", integrate_trajectory, system, p0,
                     tol=config.tol, grid=grid)
    path = stages.run("sensitivity", sensitivity_path, system, p0,
                      grid=grid, tol=config.tol, ref=ref)
    obs = stages.run("observation", observation_set, system, p0,
                     mode=mode, path=path)
    det_values = path.det_path(mode)
    mu_values = path.mu_path()

    mn = None
    if mode == "h":
        mn = stages.run("mininorm", mininorm_path, path, obs)

    directions = stages.run("directions", build_directions, config, system)
    experiment = stages.run(
        "experiment", identifiability_experiment, system, p0, directions,
        eps_grid=config.eps_grid, mode=mode, tol=config.tol, obs=obs,
        path=path)

    control = None
    if config.reduced_points is not None:
        control = stages.run(
            "negative-control", negative_control, system, p0,
            config.reduced_points, directions=directions,
            eps=max(config.eps_grid), mode=mode, tol=config.tol, obs=obs)

    return AnalysisReport(config, mode, grid, obs, det_values, mu_values,
                          mn, experiment, control, stages.timings)
