"""Exception hierarchy shared by all modules."""


class HeunError(Exception):
    """Base class for every error raised by heunhyp."""


class DomainError(HeunError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class PoleError(HeunError, ArithmeticError):
    """A parameter sits on (or within tolerance of) a pole."""


class NoConvergence(HeunError, ArithmeticError):
    """A series exhausted its term cap before meeting the tolerance."""


class StepFailure(HeunError, ArithmeticError):
    """The ODE integrator could not take a step (usually near a singular point)."""


class RootFailure(HeunError, ArithmeticError):
    """Polynomial root iteration did not converge."""


class TerminationFailure(HeunError, ArithmeticError):
    """A supposedly terminating expansion left a non-zero trailing coefficient."""


class ConsistencyError(HeunError, AssertionError):
    """Two closed forms that must coincide disagree beyond round-off."""
