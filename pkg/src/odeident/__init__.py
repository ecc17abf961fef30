"""Local identifiability analysis of time-varying parameters in ODEs.

Given a system dx/dt = f(t, x, p(t)) with a reference parameter function,
the package locates the observation times where the parameter-sensitivity
matrix loses rank, certifies perturbation directions against a set of
vanishing-rate conditions, and tests whether certified perturbations are
actually distinguishable from the reference by observing the state at
those times.
"""

from ._kernels import backend
from .certify import (ClassCertificate, KappaCheck, LambdaBound,
                      MininormPath, RankDropPoint, certify_membership,
                      check_kappa, classify_interval, estimate_alpha,
                      estimate_beta, lambda_bound, mininorm_path,
                      perturb_within_class)
from .core import (DEFAULT_GRID_POINTS, TimeGrid, VectorFunctionSamples,
                   int_norm, quadrature, sup_norm)
from .errors import (AnalysisError, ClassMembershipError, ConfigError,
                     DegenerateDirectionError, DegeneratePerturbationError,
                     DomainViolationError, ExpressionSyntaxError,
                     InadmissibleDirectionError, IntegrationFailureError,
                     InvalidInputError, InvalidRebaseError,
                     NotInClassHError, NotPositiveSemidefiniteError,
                     NumericalDegeneracyError, NumericalError, OdeidentError,
                     OrderIndeterminateError, PartitionInconsistencyError,
                     StageError, WindowTooSmallError)
from .expressions import Expression, parse_expression
from .identifiability import (DistinguishVerdict, ExperimentReport,
                              ExperimentRow, NegativeControlReport,
                              direction_family, distinguish,
                              identifiability_experiment, negative_control,
                              scalar_profile)
from .ode import (FundamentalMatrix, ParamFunction, SystemModel, Trajectory,
                  fundamental_matrix, integrate_trajectory, jacobians)
from .pipeline import (AnalysisConfig, AnalysisReport, parse_config,
                       run_pipeline)
from .registry import SystemSpec, get_system, list_systems
from .sensitivity import (PsiValue, RemainderSample, SensitivityPath,
                          psi_map, psi_operator_norm, remainder,
                          sensitivity_path)
from .zerofinder import (ObservationSet, ZeroRecord, estimate_order,
                         find_zeros, observation_set)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "AnalysisReport", "ClassCertificate",
    "ClassMembershipError", "ConfigError", "DEFAULT_GRID_POINTS",
    "DegenerateDirectionError", "DegeneratePerturbationError",
    "DistinguishVerdict", "DomainViolationError", "ExperimentReport",
    "ExperimentRow", "Expression", "ExpressionSyntaxError",
    "FundamentalMatrix", "InadmissibleDirectionError",
    "IntegrationFailureError", "InvalidInputError", "InvalidRebaseError",
    "KappaCheck", "LambdaBound", "MininormPath", "NegativeControlReport",
    "NotInClassHError", "NotPositiveSemidefiniteError",
    "NumericalDegeneracyError", "NumericalError", "ObservationSet",
    "OdeidentError", "OrderIndeterminateError", "ParamFunction",
    "PartitionInconsistencyError", "PsiValue", "RankDropPoint",
    "RemainderSample", "SensitivityPath", "StageError", "SystemModel",
    "SystemSpec", "TimeGrid", "Trajectory", "VectorFunctionSamples",
    "WindowTooSmallError", "ZeroRecord", "__version__", "backend",
    "certify_membership", "check_kappa", "classify_interval",
    "direction_family", "distinguish", "estimate_alpha", "estimate_beta",
    "estimate_order", "find_zeros", "fundamental_matrix", "get_system",
    "identifiability_experiment", "int_norm", "integrate_trajectory",
    "jacobians", "lambda_bound", "list_systems", "mininorm_path",
    "negative_control", "observation_set", "parse_config",
    "parse_expression", "perturb_within_class", "psi_map",
    "psi_operator_norm", "quadrature", "remainder", "run_pipeline",
    "scalar_profile", "sensitivity_path", "sup_norm",
]
