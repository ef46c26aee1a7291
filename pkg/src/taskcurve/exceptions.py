"""Exception types shared across the package."""


class TaskcurveError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TaskcurveError, ValueError):
    """An argument is outside the mathematical domain of a function."""


class ConvergenceError(TaskcurveError, ArithmeticError):
    """An iterative numerical routine failed to converge within its
    iteration budget.  Raised instead of returning a silently wrong
    value."""


class ParseFieldError(TaskcurveError, ValueError):
    """A structured text field could not be interpreted."""
