class ImdpError(Exception):
    """Base class for all library errors."""


class ModelFormatError(ImdpError):
    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(message)
        self.path = path


class QueryFormatError(ModelFormatError):
    pass


class UnknownStateError(ImdpError, KeyError):
    pass


class InfeasibleRowError(ImdpError):
    pass


class TooManyTargetsError(ImdpError):
    pass


class DimensionMismatchError(ImdpError, ValueError):
    pass


class SeparationError(ImdpError):
    pass


class MixtureInfeasibleError(ImdpError):
    pass


class ConvergenceError(ImdpError):
    pass


class UnsatisfiableQueryError(ImdpError):
    pass


class AssumptionError(ImdpError):
    def __init__(self, message: str, violations: list | None = None) -> None:
        super().__init__(message)
        self.violations = violations or []


class InstanceTooLargeError(ImdpError):
    pass


class FrequencyDivergenceError(ImdpError):
    pass


class GeneratorConfigError(ImdpError):
    pass


class InputFileError(ImdpError):
    """An input file could not be read or decoded; the message is ready for display."""
