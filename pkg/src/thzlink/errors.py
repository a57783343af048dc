"""Exception types shared across the library."""


class ThzLinkError(Exception):
    """Base class for all thzlink errors."""


class InvalidParameterError(ThzLinkError, ValueError):
    """A physical parameter is outside its valid domain."""


class OutOfDomainError(ThzLinkError, ValueError):
    """Requested evaluation point lies outside the tabulated range."""


class DegenerateMediumError(ThzLinkError, ValueError):
    """Operation is undefined for a lossless medium (k = 0)."""


class ConvergenceError(ThzLinkError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether to proceed anyway.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ThresholdDegeneracyError(ThzLinkError, ValueError):
    """No ML decision boundary lies strictly between the two symbols.

    Raised when the noise-variance ratio of a symbol pair is so extreme that
    the higher-variance symbol's decision region swallows its neighbour.
    """


class DegenerateDistributionError(ThzLinkError, ValueError):
    """The channel amplitude is a point mass (infinite Rician factor)."""


class ConfigError(ThzLinkError, ValueError):
    """An experiment configuration failed validation."""
