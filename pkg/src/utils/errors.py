from typing import Any, Optional


class SensivalueError(Exception):
    """Base error; exit_code is what the CLI returns when it escapes."""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DataError(SensivalueError):
    exit_code = 1


class ValidationError(DataError):
    pass


class UsageError(SensivalueError):
    exit_code = 2


class FitError(DataError):
    def __init__(self, message: str, last_iterate: Optional[Any] = None, iterations: int = 0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class NumericalError(DataError):
    def __init__(self, message: str, state: Optional[dict] = None):
        super().__init__(message if not state else f"{message} (state: {state})")
        self.state = state or {}


class StudyError(DataError):
    pass


class ApproximationWarning(UserWarning):
    """Raised through warnings.warn when a result relies on a weak approximation."""
