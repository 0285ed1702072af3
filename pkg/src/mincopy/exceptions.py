"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside its mathematical domain."""


class ArityError(DomainError):
    """Copy count outside the supported {1, 2}."""


class DimensionError(DomainError):
    """Operator/state dimension mismatch."""


class InvalidSupportError(ValueError):
    """A measurement support violates its feasibility conditions."""


class SupportSearchError(RuntimeError):
    """The tilt search did not terminate; carries the last tilt state."""

    def __init__(self, message, tilt_a=None, tilt_b=None, minimizers=None):
        super().__init__(message)
        self.tilt_a = tilt_a
        self.tilt_b = tilt_b
        self.minimizers = minimizers


class InfeasibleError(RuntimeError):
    """A strategy cannot meet the error requirement (value diverges)."""


class RunawayTrialError(RuntimeError):
    """A simulated trial exceeded the copy cap without stopping."""


class NonProgressError(RuntimeError):
    """An analytic recursion exceeded its depth cap."""


class ConfigError(ValueError):
    """Configuration parsing or validation failure; names the offending key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
