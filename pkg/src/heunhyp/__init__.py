"""Heun equation solutions through expansions in Gauss hypergeometric functions."""

from importlib.metadata import PackageNotFoundError, version

from .closed_values import (BoundaryValues, a_orbit, ascending_boundary_values,
                            derivative_at_origin, descending_boundary_values,
                            value_at_one, value_at_origin)
from .core import (HeunParams, eval_local, frobenius_series, heun_residual, integrate_ode,
                   make_params, value_near_one)
from .errors import (ConsistencyError, DomainError, HeunError, NoConvergence, PoleError,
                     RootFailure, StepFailure, TerminationFailure)
from .expansions import (Direction, Expansion, Regime, build_expansion, evaluate,
                         expansion_defect, generate_coefficients, is_two_term,
                         sum_expansion, two_term_coefficients,
                         two_term_descending_coefficients)
from .hypergeom import SeriesValue, hyp2f1, hyper_3f2_unit, hyper_pfq_unit
from .termination import (CaseKind, TerminationCase, build_finite_solution,
                          detect_termination_cases, q_roots)

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
