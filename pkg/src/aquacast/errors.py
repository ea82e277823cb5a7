"""Exception types shared across the package."""


class AquacastError(Exception):
    """Base class for package errors."""


class DataError(AquacastError, ValueError):
    """Malformed, inconsistent or insufficient input data."""


class ShapeError(AquacastError, ValueError):
    """Array or window dimensions do not match a model's contract."""


class NumericalError(AquacastError, ArithmeticError):
    """Training diverged or produced non-finite values."""
