"""Exception hierarchy.

Two families: :class:`PreconditionError` for bad inputs or configurations
(CLI exit code 1) and :class:`NumericalError` for failures that occur while
computing (CLI exit code 2).
"""


class LpextError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(LpextError, ValueError):
    exit_code = 1


class NumericalError(LpextError, ArithmeticError):
    exit_code = 2


class InvalidExponentError(PreconditionError):
    pass


class ShapeError(PreconditionError):
    """Grid functions or operators living on incompatible grids."""


class DegenerateInputError(PreconditionError):
    pass


class MeasureParameterError(PreconditionError):
    pass


class ProbabilityViolationError(PreconditionError):
    pass


class OutOfDomainError(PreconditionError):
    pass


class BootstrapInfeasibleError(PreconditionError):
    pass


class MonotonicityViolationError(PreconditionError):
    pass


class NotNearExtremizerError(PreconditionError):
    pass


class InsufficientResolutionError(PreconditionError):
    pass


class ConfigError(PreconditionError):
    pass


class NumericRangeError(NumericalError):
    pass


class IterationDivergedError(NumericalError):
    pass


class EstimationFailedError(NumericalError):
    pass


class PositivityRadiusNotFoundError(NumericalError):
    def __init__(self, message, min_profile=None):
        super().__init__(message)
        #: list of (N, min of the kernel power over the ball)
        self.min_profile = list(min_profile or [])
