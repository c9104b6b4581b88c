"""Exception hierarchy for the qubit Zeno dynamics engine."""

from typing import Any, Dict, List, Optional


class ZenoError(Exception):
    """Base class for every error raised by the engine."""


class DomainError(ZenoError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(ZenoError, ValueError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(ZenoError):
    """A quadrature, fit, iteration or diagonalization did not succeed.

    Args:
        message: Human-readable description
        context: Diagnostics such as panel bounds or iteration counts
    """

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        self.context = dict(context or {})
        if self.context:
            details = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
            message = f"{message} ({details})"
        super().__init__(message)


class PoleNotFoundError(NumericalError):
    """No sign change of the pole condition on the scanned interval."""


class ConsistencyError(NumericalError):
    """Two independent evaluations of the same quantity disagree."""


class DegenerateCaseError(NumericalError):
    """The survival amplitude vanished, so no rate can be extracted."""


class MethodValidityError(ZenoError):
    """The self-consistent renormalization has no unique solution."""


class GridError(ZenoError):
    """Every cell of a parameter grid failed.

    Args:
        failures: (cell index, error message) pairs
    """

    def __init__(self, failures: List[Any]):
        self.failures = list(failures)
        super().__init__(f"all {len(self.failures)} grid cells failed")
