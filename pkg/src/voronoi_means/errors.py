class SummabilityError(Exception):
    """Base class for every error raised by voronoi_means."""


class SequenceError(SummabilityError):
    """A sequence could not be evaluated (out of range, non-finite, zero weight)."""


class ParameterError(SummabilityError, ValueError):
    """Unknown method name, parameter out of range or malformed definition."""


class SingularSystemError(SummabilityError):
    """A triangular system has a zero pivot."""


class DomainError(SummabilityError):
    """An argument lies outside the domain where a transform is defined."""


class ConvergenceError(SummabilityError):
    """A numerical procedure (bisection, truncation, quadrature) did not settle."""
