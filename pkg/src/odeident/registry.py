"""System catalog: expression-defined models and the builtin registry.

A :class:`SystemSpec` is the declarative form of a system (dimensions,
window, initial state, right-hand side expressions, reference parameter
expressions).  ``build`` turns it into a :class:`~odeident.ode.SystemModel`
with analytic Jacobians derived symbolically, plus the reference
:class:`~odeident.ode.ParamFunction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidInputError
from .expressions import parse_expression
from .ode import ParamFunction, SystemModel

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SystemSpec:
    """Declarative system description.

    ``rhs`` holds one expression per state coordinate (variables ``t``,
    ``x0..``, ``p0..``); ``p0`` holds one expression per parameter
    coordinate (variable ``t`` only).  ``mode`` selects the determinant
    path: "k" (square, det of the sensitivity matrix), "h" (tall, det of
    its Gram matrix), or "auto" (k when l == n, else h).
    """

    name: str
    n: int
    l: int
    T: float
    x0: tuple
    rhs: tuple
    p0: tuple
    mode: str = "auto"
    description: str = ""

    def __post_init__(self):
        if self.n < 1 or self.l < 1:
            raise ConfigError("need n >= 1 and l >= 1")
        if not self.T > 0:
            raise ConfigError("need T > 0")
        if len(self.x0) != self.n:
            raise ConfigError(f"x0 has {len(self.x0)} entries, expected {self.n}")
        if len(self.rhs) != self.n:
            raise ConfigError(f"rhs has {len(self.rhs)} entries, expected {self.n}")
        if len(self.p0) != self.l:
            raise ConfigError(f"p0 has {len(self.p0)} entries, expected {self.l}")
        if self.mode not in ("k", "h", "auto"):
            raise ConfigError(f"mode must be k, h, or auto, not {self.mode!r}")
        if self.mode == "k" and self.n != self.l:
            raise ConfigError("square-determinant mode needs n == l")
        if self.mode == "h" and self.l > self.n:
            raise ConfigError("tall-determinant mode needs l <= n")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "rhs", tuple(self.rhs))
        object.__setattr__(self, "p0", tuple(self.p0))

    @property
    def resolved_mode(self):
        if self.mode != "auto":
            return self.mode
        return "k" if self.n == self.l else "h"

    def build(self):
        """Compile to ``(SystemModel, ParamFunction)`` with symbolic Jacobians."""
        f_exprs = [parse_expression(s, self.n, self.l) for s in self.rhs]
        p_exprs = [parse_expression(s, 0, 0) for s in self.p0]
        jx_exprs = [[e.diff_x(j) for j in range(self.n)] for e in f_exprs]
        jp_exprs = [[e.diff_p(j) for j in range(self.l)] for e in f_exprs]
        dp_exprs = [e.diff_t() for e in p_exprs]

        def rhs(t, x, p):
            return np.array([e.eval(t, x, p) for e in f_exprs])

        def jac_x(t, x, p):
            return np.array([[e.eval(t, x, p) for e in row]
                             for row in jx_exprs])

        def jac_p(t, x, p):
            return np.array([[e.eval(t, x, p) for e in row]
                             for row in jp_exprs])

        system = SystemModel(self.n, self.l, self.T, np.array(self.x0),
                             rhs, jac_x, jac_p, name=self.name)

        def p_eval(t):
            return np.array([e.eval(t) for e in p_exprs])

        def p_deriv(t):
            return np.array([e.eval(t) for e in dp_exprs])

        p0 = ParamFunction(p_eval, p_deriv, self.l,
                           description=", ".join(self.p0),
                           domain=(0.0, self.T), validate=False)
        return system, p0

    def to_dict(self):
        """JSON-ready echo of the spec (canonical expression text)."""
        return {
            "name": self.name,
            "n": self.n,
            "l": self.l,
            "T": self.T,
            "x0": list(self.x0),
            "rhs": [parse_expression(s, self.n, self.l).canonical()
                    for s in self.rhs],
            "p0": [parse_expression(s, 0, 0).canonical() for s in self.p0],
            "mode": self.mode,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d):
        """Inverse of :meth:`to_dict`; unknown keys are rejected."""
        allowed = {"name", "n", "l", "T", "x0", "rhs", "p0", "mode",
                   "description"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown system keys: {sorted(unknown)}")
        try:
            return cls(
                name=str(d.get("name", "custom")),
                n=int(d["n"]),
                l=int(d["l"]),
                T=float(d["T"]),
                x0=tuple(float(v) for v in d["x0"]),
                rhs=tuple(str(s) for s in d["rhs"]),
                p0=tuple(str(s) for s in d["p0"]),
                mode=str(d.get("mode", "auto")),
                description=str(d.get("description", "")),
            )
        except KeyError as exc:
            raise ConfigError(f"system spec missing key {exc}") from exc


_BUILTINS = (
    SystemSpec(
        "no-zero", 1, 1, 1.0, (0.0,), ("p0",), ("1",), "k",
        "dx = p; sensitivity is constant 1, no determinant zeros"),
    SystemSpec(
        "simple-zero", 1, 1, 1.0, (0.0,), ("(t - 0.5) * p0",), ("1",), "k",
        "dx = (t - 0.5) p; determinant has a simple zero at t = 0.5"),
    SystemSpec(
        "double-zero", 1, 1, 1.0, (0.0,), ("(t - 0.5)^2 * p0",), ("1",), "k",
        "dx = (t - 0.5)^2 p; determinant zero of order 2 at t = 0.5"),
    SystemSpec(
        "affine", 1, 1, 1.0, (1.0,), ("x0 + p0",), ("0",), "k",
        "dx = x + p; linear with exact closed forms"),
    SystemSpec(
        "nonlinear", 1, 1, 1.0, (0.1,), ("x0^2 + p0",), ("0",), "k",
        "dx = x^2 + p; genuinely nonlinear remainder behaviour"),
    SystemSpec(
        "tall-rank-drop", 2, 1, 1.0, (0.0, 0.0),
        ("(t - 0.5) * p0 + 0.3 * x1", "(t - 0.5) * p0 - 0.3 * x0"),
        ("1",), "h",
        "two states, one parameter; Gram determinant 2 (t - 0.5)^2"),
    SystemSpec(
        "tall-mixed", 3, 2, 1.0, (0.0, 0.0, 0.0),
        ("(t - 0.5) * p0", "p1", "0.2 * x0"),
        ("1", "1"), "h",
        "three states, two parameters; Gram determinant (t - 0.5)^2"),
    SystemSpec(
        "rotation-2d", 2, 2, 1.0, (1.0, 0.0),
        ("x1 + p0", "-x0 + p1"), ("0", "0"), "k",
        "rotating flow with identity sensitivity; no determinant zeros"),
)

_REGISTRY = {spec.name: spec for spec in _BUILTINS}


def list_systems():
    """Names and descriptions of the builtin systems, in catalog order."""
    return [(s.name, s.description) for s in _BUILTINS]


def get_system(name):
    """Builtin :class:`SystemSpec` by name."""
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise InvalidInputError(
            f"unknown system {name!r}; known systems: {known}") from None
