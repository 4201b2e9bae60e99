"""Exception types raised across the toolkit."""


class EmgDdaError(Exception):
    """Base class for all toolkit errors."""


class AmbiguousLabel(EmgDdaError, ValueError):
    pass


class ParseError(EmgDdaError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(EmgDdaError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class WrongWindow(EmgDdaError, ValueError):
    pass


class ZeroVariance(EmgDdaError, ValueError):
    pass


class SignalTooShort(EmgDdaError, ValueError):
    pass


class LengthMismatch(EmgDdaError, ValueError):
    pass


class DimensionMismatch(EmgDdaError, ValueError):
    pass


class EmptyDataset(EmgDdaError, ValueError):
    pass


class InsufficientClasses(EmgDdaError, ValueError):
    pass


class InsufficientClassData(EmgDdaError, ValueError):
    pass


class SingularCovariance(EmgDdaError, ArithmeticError):
    pass


class SolverNonConvergence(EmgDdaError, RuntimeError):
    pass


class TooFewParticipants(EmgDdaError, ValueError):
    pass


class OutOfRange(EmgDdaError, ValueError):
    pass


class ConfigError(EmgDdaError, ValueError):
    pass
