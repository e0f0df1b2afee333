"""Exception types raised across the solver stages."""


class WeylslError(Exception):
    """Base class for all package errors."""


class InvalidInputError(WeylslError, ValueError):
    pass


class DomainError(WeylslError, ValueError):
    pass


class ConvergenceError(WeylslError, RuntimeError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class IncompleteSpectrumError(WeylslError, RuntimeError):
    def __init__(self, message, found=()):
        super().__init__(message)
        self.found = list(found)


class UnderdeterminedSystemError(WeylslError, ValueError):
    pass


class SingularSystemError(WeylslError, RuntimeError):
    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class IllConditionedInputError(SingularSystemError):
    pass


class ReconstructionQualityError(WeylslError, RuntimeError):
    pass


class PreconditionError(WeylslError, ValueError):
    pass


class DivisionGuardError(WeylslError, RuntimeError):
    pass


class StageError(WeylslError, RuntimeError):
    """Wraps a failure in one of the inverse-solver stages.

    ``stage`` names the failing step and ``diagnostics`` holds whatever was
    collected before the failure.
    """

    def __init__(self, stage, cause, diagnostics=None):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.diagnostics = dict(diagnostics or {})
