"""Exception taxonomy shared by all fixorder modules."""


class FixorderError(Exception):
    """Base class for domain errors raised by fixorder."""


class DimensionError(FixorderError, ValueError):
    pass


class NonProperError(FixorderError, ValueError):
    pass


class DegenerateError(FixorderError, ValueError):
    pass


class ConfigError(FixorderError, ValueError):
    pass


class AlgebraicLoopError(FixorderError):
    """Raised when I - Dk*D22 is singular (ill-posed interconnection)."""


class NumericalError(FixorderError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularFrequencyError(FixorderError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class StabilizationFailure(FixorderError):
    """No start of a synthesis run reached a stable closed loop.

    ``best`` holds the least-unstable controller found.
    """

    def __init__(self, message, best=None, value=None):
        super().__init__(message)
        self.best = best
        self.value = value


class PlantFormatError(FixorderError, ValueError):
    pass
