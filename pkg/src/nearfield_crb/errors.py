"""Exception hierarchy shared by the numerical core and the CLI."""


class NearFieldError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NearFieldError, ValueError):
    """A parameter set violates a model constraint (e.g. r <= R)."""


class DomainError(NearFieldError, ValueError):
    """A special function was evaluated outside its domain."""


class ConvergenceError(NearFieldError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""


class UnidentifiableError(NearFieldError, ArithmeticError):
    """The reduced Fisher matrix is singular to working precision."""
