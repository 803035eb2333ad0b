"""Exception hierarchy shared by all modules."""


class HardyLabError(Exception):
    """Base class for every error raised by the package."""


class InvalidDomain(HardyLabError):
    pass


class GradingTooAggressive(HardyLabError):
    pass


class InvariantViolation(HardyLabError):
    pass


class ParseError(HardyLabError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QuadratureNodeAtOrigin(HardyLabError):
    pass


class ZeroDenominator(HardyLabError):
    pass


class NumericalError(HardyLabError):
    """Numerical failure; the CLI maps every subclass to exit status 3."""


class NoConvergence(NumericalError):
    def __init__(self, message, iterations=None):
        self.iterations = iterations
        super().__init__(message)


class NotSPD(NumericalError):
    pass


class DimensionMismatch(HardyLabError):
    pass


class OutOfRange(HardyLabError):
    pass


class QuadratureFailure(NumericalError):
    pass


class DomainNotHalfPlane(HardyLabError):
    pass


class DomainNotSector(HardyLabError):
    pass


class ConfigInvalid(HardyLabError):
    pass
