"""Exception hierarchy shared by all gausscap modules."""


class GausscapError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GausscapError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class ValidationError(GausscapError, ValueError):
    """An input object violates a structural invariant (symmetry, physicality...)."""


class SingularityError(DomainError):
    """The requested quantity is singular at this point (division by zero, log(0))."""


class ConvergenceError(GausscapError, RuntimeError):
    """A numerical procedure did not reach its tolerance."""


class CutoffError(GausscapError, RuntimeError):
    """A Fock-space truncation is too small for the requested accuracy."""


class ConditioningError(GausscapError, RuntimeError):
    """A matrix is too close to singular for a stable inverse."""
