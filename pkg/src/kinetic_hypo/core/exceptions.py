"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Standardized exception hierarchy for the numerical toolkit.

All exceptions inherit from KineticHypoError, allowing both specific and general
handling strategies. Each error may carry the ``module.operation`` tag of the
stage that raised it, which the CLI prints verbatim and maps to an exit code.
"""

from typing import Optional, Any, Dict

import numpy as np


class KineticHypoError(Exception):
    """
    Base exception for all toolkit errors.

    Args:
        message (str): Human-readable error description.
        details (Optional[Dict[str, Any]]): Structured error information.
        cause (Optional[Exception]): Original exception that triggered this error.
        operation (Optional[str]): ``module.operation`` tag of the failing stage.
    """

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        cause: Optional[Exception] = None,
        operation: Optional[str] = None,
    ):
        super().__init__(message)
        self.message = message
        self.details = details or {}
        self.cause = cause
        self.operation = operation

    def __str__(self) -> str:
        text = f"[{self.operation}] {self.message}" if self.operation else self.message
        if self.cause:
            return f"{text} (caused by: {self.cause})"
        return text


class ValidationError(KineticHypoError):
    """
    Raised when an argument is invalid.

    Used for wrong shapes, reversed time intervals, non-positive rates, and
    meshes or grids that do not satisfy an operation's precondition.
    """

    pass


class DomainError(KineticHypoError):
    """
    Raised when a parameter lies outside the mathematical domain of an operation,
    such as a stability index outside (0, 2) or a moment order q >= alpha.
    """

    pass


class DegeneracyError(KineticHypoError):
    """
    Raised when a non-degeneracy requirement fails: singular flow matrices,
    ill-conditioned coefficients, or spherical measures missing a direction.
    """

    pass


class AccuracyError(KineticHypoError):
    """
    Raised when a quadrature does not converge, i.e. two refinement levels
    disagree by more than the operation's tolerance.
    """

    pass


class ConsistencyError(KineticHypoError):
    """
    Raised when an internal identity is violated beyond tolerance, such as the
    Hermitian symmetry of a reconstruction or the sum of a collision split.
    """

    pass


class ConfigurationError(KineticHypoError):
    """
    Raised when an experiment configuration document is malformed or incomplete.
    """

    pass


class FileError(KineticHypoError):
    """
    Raised for file I/O related problems.

    Used for missing configuration files, permission problems, and unreadable documents.
    """

    pass


class ExportError(KineticHypoError):
    """
    Raised when writing a report, field or ensemble export fails.
    """

    pass


# Validation helper functions that raise appropriate exceptions


def validate_positive(value: float, name: str, operation: Optional[str] = None) -> float:
    """
    Validate that a numeric value is strictly positive and finite.

    Args:
        value (float): Value to check.
        name (str): Name of the parameter.
        operation (Optional[str]): Operation tag for the error message.

    Returns:
        float: The value if positive.

    Raises:
        ValidationError: If value is not positive.
    """
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(
            f"{name} must be positive", details={name: value}, operation=operation
        )
    return value


def validate_range(
    start: float, end: float, name: str = "Range", operation: Optional[str] = None
) -> tuple[float, float]:
    """
    Validate that an interval is ordered (start <= end).

    Args:
        start (float): Interval start.
        end (float): Interval end.
        name (str): Name of the interval.
        operation (Optional[str]): Operation tag for the error message.

    Returns:
        tuple[float, float]: Tuple of (start, end) if valid.

    Raises:
        ValidationError: If the interval is reversed.
    """
    if end < start:
        raise ValidationError(
            f"{name} is invalid: end ({end}) must not precede start ({start})",
            details={"start": start, "end": end, "range_name": name},
            operation=operation,
        )
    return start, end


def validate_open_interval(
    value: float,
    low: float,
    high: float,
    name: str,
    operation: Optional[str] = None,
) -> float:
    """
    Validate that a value lies strictly inside (low, high).

    Raises:
        DomainError: If value is outside the open interval.
    """
    if not (low < value < high):
        raise DomainError(
            f"{name} must lie in ({low}, {high}), got {value}",
            details={name: value, "low": low, "high": high},
            operation=operation,
        )
    return value


def validate_file_exists(filepath: str) -> str:
    """
    Validate that a file exists and is readable.

    Args:
        filepath (str): Path to check.

    Returns:
        str: The filepath if valid.

    Raises:
        FileError: If file doesn't exist or isn't readable.
    """
    import os

    if not os.path.exists(filepath):
        raise FileError(f"File not found: {filepath}", details={"path": filepath})

    if not os.access(filepath, os.R_OK):
        raise FileError(
            f"File is not readable: {filepath}",
            details={"path": filepath, "permission": "read"},
        )

    return filepath


def validate_finite(array, name: str = "array", operation: Optional[str] = None):
    """
    Validate that an array contains only finite values.

    Raises:
        ValidationError: If NaN or infinite values are found.
    """
    arr = np.asarray(array)
    if not np.all(np.isfinite(arr)):
        bad = int(np.sum(~np.isfinite(arr)))
        raise ValidationError(
            f"{name} contains {bad} non-finite values",
            details={"non_finite_count": bad, "shape": arr.shape},
            operation=operation,
        )
    return arr
