"""
Error hierarchy for the toolkit.
Services raise these; the CLI maps them to exit codes.
"""

from typing import Any, Dict, Optional


class LevyToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(LevyToolkitError, ValueError):
    """An argument lies outside the domain of the operation"""


class UnsupportedError(LevyToolkitError):
    """The operation is not available for this process kind"""


class ConvergenceError(LevyToolkitError):
    """A root search or iteration did not converge"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics or {}

    def __reduce__(self):
        return self.__class__, (self.message, self.diagnostics)


class PrecisionError(LevyToolkitError):
    """A numerical routine missed its target accuracy"""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved estimate {achieved:.3e})")
        self.message = message
        self.achieved = achieved

    def __reduce__(self):
        return self.__class__, (self.message, self.achieved)


class BudgetError(LevyToolkitError):
    """A simulation exhausted its step or attempt budget"""


class HorizonTooShortError(LevyToolkitError):
    """A simulated window is too short to locate a last passage or an argmin"""


class RefusalError(LevyToolkitError):
    """The requested sampler would be too inefficient to run"""

    def __init__(self, message: str, advice: str):
        super().__init__(f"{message}. {advice}")
        self.message = message
        self.advice = advice

    def __reduce__(self):
        return self.__class__, (self.message, self.advice)


class DataError(LevyToolkitError):
    """Sample data is insufficient for the requested statistic"""


class ConfigError(LevyToolkitError):
    """A run configuration could not be parsed or validated"""

    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if path:
            location.append(f"at '{path}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.message = message
        self.path = path
        self.line = line

    def __reduce__(self):
        return self.__class__, (self.message, self.path, self.line)


class EstimationError(LevyToolkitError):
    """A Monte Carlo estimate was aborted by a per-sample failure"""

    def __init__(self, message: str, completed: int, partial: Optional[Any] = None):
        super().__init__(f"{message} (completed {completed} samples before the failure)")
        self.message = message
        self.completed = completed
        self.partial = partial

    def __reduce__(self):
        return self.__class__, (self.message, self.completed, self.partial)
