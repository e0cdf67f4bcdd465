"""
Custom application exceptions.
"""
from typing import Any, Dict, Optional


class IcdmBaseException(Exception):
    """
    Base class for all custom exceptions.

    Attributes:
        default_message: Default error message for the exception
        exit_code: Process exit code used by the command line
        details: Optional additional error details
    """
    default_message: str = "An unexpected application error occurred."
    exit_code: int = 1
    details: Optional[Dict[str, Any]] = None

    def __init__(
            self,
            message: Optional[str] = None,
            exit_code: Optional[int] = None,
            details: Optional[Dict[str, Any]] = None
    ):
        self.message = message or self.default_message
        self.exit_code = exit_code or self.exit_code
        self.details = details
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a dictionary for JSON error output."""
        result = {
            "error": {
                "code": self.__class__.__name__,
                "message": self.message,
                "exit_code": self.exit_code
            }
        }
        if self.details:
            result["error"]["details"] = self.details
        return result


class UsageException(IcdmBaseException):
    """Raised when an API or command is called with invalid arguments."""
    default_message = "Invalid usage."
    exit_code = 2


class ConfigException(IcdmBaseException):
    """Raised when a configuration value is missing or out of range."""
    default_message = "Invalid configuration."


class DataFileNotFoundException(IcdmBaseException):
    """Raised when an input file does not exist."""
    default_message = "Input file not found."

    def __init__(self, path: str, **kwargs):
        message = f"File not found: {path}"
        super().__init__(message=message, details={"path": path}, **kwargs)


class ParseException(IcdmBaseException):
    """Raised when a CSV row cannot be parsed."""
    default_message = "Malformed input row."

    def __init__(self, path: str, line: Optional[int], reason: str, **kwargs):
        where = f"{path}:{line}" if line is not None else path
        message = f"Malformed row at {where}: {reason}"
        super().__init__(message=message, details={"path": path, "line": line}, **kwargs)


class DataValidationException(IcdmBaseException):
    """Raised when parsed data violates a dataset invariant."""
    default_message = "Dataset validation failed."


class UnknownExerciseException(DataValidationException):
    """Raised when logs reference an exercise the model has never seen."""
    default_message = "Unknown exercise id."

    def __init__(self, exercise_id: int, **kwargs):
        message = f"Unknown exercise id: {exercise_id}"
        super().__init__(message=message, details={"exercise_id": int(exercise_id)}, **kwargs)


class NoEvidenceException(IcdmBaseException):
    """Raised when a student to diagnose has no response logs."""
    default_message = "No evidence: student has no response logs."

    def __init__(self, student_id: int, message: Optional[str] = None, **kwargs):
        message = message or f"No evidence: student {student_id} has no response logs"
        super().__init__(message=message, details={"student_id": int(student_id)}, **kwargs)


class NumericException(IcdmBaseException):
    """Raised when a computation produces NaN or Inf."""
    default_message = "Non-finite value encountered."

    def __init__(self, op: str, message: Optional[str] = None, details: Optional[Dict[str, Any]] = None, **kwargs):
        self.op = op
        merged = {"op": op, **(details or {})}
        super().__init__(message=message or f"Non-finite output from op '{op}'", details=merged, **kwargs)


class SnapshotFormatException(IcdmBaseException):
    """Raised when a snapshot file is truncated or has an unknown layout."""
    default_message = "Snapshot file is corrupt or of an unsupported format."


class MetricUndefinedException(IcdmBaseException):
    """Raised when a metric has no valid value for the given inputs."""
    default_message = "Metric is undefined for the given inputs."
