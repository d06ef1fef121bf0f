"""Exception hierarchy for roughfrac."""


class RoughFracError(Exception):
    """Base class for all errors raised by the package."""


class ConstraintViolation(RoughFracError, ValueError):
    """An exponent bundle violates one of its defining inequalities."""

    def __init__(self, constraint, message):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


class InvalidLadder(RoughFracError, ValueError):
    pass


class ZeroVector(RoughFracError, ValueError):
    pass


class NonIntegrable(RoughFracError, ArithmeticError):
    pass


class NonFiniteWeight(RoughFracError, ValueError):
    pass


class DegenerateWeight(RoughFracError, ValueError):
    pass


class GridMismatch(RoughFracError, ValueError):
    pass


class ZeroMeasureBall(RoughFracError, ValueError):
    pass


class InvalidAlpha(RoughFracError, ValueError):
    pass


class InvalidExponent(RoughFracError, ValueError):
    pass


class NoCoveringBall(RoughFracError, ValueError):
    pass


class EmptySubset(RoughFracError, ValueError):
    pass


class PreconditionFailed(RoughFracError):
    pass


class DominationViolation(RoughFracError):
    def __init__(self, message, cells=()):
        self.cells = list(cells)
        super().__init__(message)


class ConfigError(RoughFracError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
