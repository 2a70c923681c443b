"""Exception types raised across metriclab."""


class MetricLabError(Exception):
    """Base class for all metriclab errors."""


class CarrierViolation(MetricLabError, ValueError):
    """A point lies outside the carrier set of its space."""


class UnknownFamily(MetricLabError, KeyError):
    """A space or kernel family name is not in the catalog."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown family"


class BadParams(MetricLabError, ValueError):
    """Family parameters are missing, unknown, or out of range."""


class NonPositiveDiagonal(MetricLabError, ValueError):
    """K(x, x) <= 0, so the kernel cannot induce a distance at x."""


class DuplicatePoints(MetricLabError, ValueError):
    pass


class StepLimitExceeded(MetricLabError, RuntimeError):
    """Greedy cover construction did not reach the right endpoint."""


class NoCanonicalPath(MetricLabError, ValueError):
    pass


class DegenerateBall(MetricLabError, ValueError):
    """No carrier point was found at the requested radius."""


class InsufficientData(MetricLabError, ValueError):
    pass


class ZeroDenominator(MetricLabError, ZeroDivisionError):
    pass


class NonFiniteValue(MetricLabError, ValueError):
    pass
