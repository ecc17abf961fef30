"""Exception hierarchy for odeident.

Every failure mode raised by the library derives from :class:`OdeidentError`
so callers (and the CLI) can map errors to exit codes by class:

* configuration / input problems   -> :class:`InvalidInputError` family
* analysis-level verdict failures  -> :class:`AnalysisError` family
* numerical breakdowns             -> :class:`NumericalError` family
"""


class OdeidentError(Exception):
    """Base class for all library errors."""


class InvalidInputError(OdeidentError, ValueError):
    """Malformed or inconsistent user input (shapes, grids, orderings)."""


class ConfigError(InvalidInputError):
    """Bad configuration file or CLI argument combination."""


class ExpressionSyntaxError(ConfigError):
    """Expression text failed to parse.

    Carries the 1-based line and column of the offending token.
    """

    def __init__(self, message, line=1, col=1):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class InvalidRebaseError(InvalidInputError):
    """A supplied trajectory is inconsistent with the requested base point."""


class AnalysisError(OdeidentError):
    """The analysis itself reached a well-defined negative verdict."""


class DomainViolationError(AnalysisError):
    """A trajectory or evaluation left the admissible domain."""


class OrderIndeterminateError(AnalysisError):
    """Zero-order fit did not converge to an integer order."""


class NotPositiveSemidefiniteError(AnalysisError):
    """A Gram-type matrix or path shows a genuinely negative value."""


class NotInClassHError(AnalysisError):
    """A rank-drop point violates the tall-mode class requirements."""


class ClassMembershipError(AnalysisError):
    """Certification could not be carried out for a structural reason."""


class DegeneratePerturbationError(ClassMembershipError):
    """The perturbation vanishes identically on the analysis interval."""


class DegenerateDirectionError(ClassMembershipError):
    """The sensitivity image of the direction vanishes identically."""


class InadmissibleDirectionError(ClassMembershipError):
    """A requested perturbation direction violates the vanishing-rate bound."""


class PartitionInconsistencyError(AnalysisError):
    """Observation points and determinant values disagree about vanishing."""


class NumericalError(OdeidentError):
    """Numerical method failed to deliver the requested accuracy."""


class IntegrationFailureError(NumericalError):
    """Adaptive integrator could not complete (step underflow, NaN, blowup)."""


class NumericalDegeneracyError(NumericalError):
    """A matrix required to be invertible is numerically singular."""


class WindowTooSmallError(NumericalError):
    """Too few usable samples inside a local fit window."""


class StageError(OdeidentError):
    """Wraps an error with the pipeline stage where it occurred."""

    def __init__(self, stage, original):
        super().__init__(f"stage '{stage}': {original}")
        self.stage = stage
        self.original = original
