"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid or missing configuration input; `field` names the offender."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced an unusable value.

    Carries the best available estimate and its error bound so callers can
    report partial results instead of losing them.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
