"""Exception hierarchy shared by all modules."""


class GraphStabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GraphStabError, ValueError):
    """Input lies outside the domain where a quantity is defined."""


class RegularValueError(DomainError):
    """A level is critical (gradient too small on the level set)."""


class PreconditionError(GraphStabError):
    """A hypothesis required by an operation does not hold."""


class OutwardMinimizingUnverified(PreconditionError):
    """The sufficient condition for outward-minimizing level sets failed."""


class ConvergenceError(GraphStabError):
    """A numerical procedure did not converge within its budget."""


class InternalError(GraphStabError):
    """Something that cannot happen mathematically happened numerically."""
