"""Exception types and small argument checks shared across the package."""

import math

import numpy as np


class TerrainError(Exception):
    """Base class for all errors raised by polyterrain."""

    exit_code = 1


class ValidationError(TerrainError, ValueError):
    """Bad argument value or shape."""

    exit_code = 1


class ConfigurationError(ValidationError):
    """A cell configuration cannot satisfy its corner constraints."""


class SolveError(TerrainError, ArithmeticError):
    """Constraint system is inconsistent at the requested tolerance."""

    exit_code = 3

    def __init__(self, message, max_residual=float("nan")):
        super().__init__(message)
        self.max_residual = max_residual


class NumericalError(TerrainError, ArithmeticError):
    """An iterative numerical procedure did not converge."""

    exit_code = 3


class EmptyMaskError(ValidationError):
    """A coastline mask has no pixels to measure."""


def check_positive_int(value, name, minimum=1):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_real(value, name, low=None, high=None, low_open=False, high_open=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        raise ValidationError(f"{name} out of range: {value}")
    if high is not None and (value > high or (high_open and value == high)):
        raise ValidationError(f"{name} out of range: {value}")
    return value


def check_finite_array(arr, name):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr
