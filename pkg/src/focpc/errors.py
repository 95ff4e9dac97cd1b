"""Exception hierarchy shared by every module in the package."""


class FocpError(Exception):
    """Base class for all package errors."""


class DomainError(FocpError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PreconditionError(FocpError, ValueError):
    """Input data violates a documented precondition (e.g. monotonicity)."""


class ConvergenceError(FocpError, ArithmeticError):
    """A series or iteration did not reach its tolerance within its budget."""


class DivergenceError(FocpError, ArithmeticError):
    """A time-stepping solver produced a state of non-finite or huge norm."""
