"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A scalar or structural parameter is outside its admissible range."""


class InvalidSmoothnessError(ParameterError):
    """Smoothness order below 2 cannot drive the kernel construction."""


class InvalidDimensionError(ParameterError):
    """Dimension must be a positive integer."""


class DomainError(ValueError):
    """Argument lies outside the function's domain."""


class EvaluationError(RuntimeError):
    """Objective evaluation produced a non-finite value."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class DivergenceError(RuntimeError):
    """Iterates left the safety region; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class UnsupportedCertificationError(RuntimeError):
    """Requested certification needs data the problem does not provide."""


class UnknownProblemError(ParameterError):
    """Problem name is not in the registry and cannot be parsed."""
