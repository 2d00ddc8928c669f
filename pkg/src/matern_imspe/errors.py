"""Exception types shared across the package."""


class MaternImspeError(Exception):
    """Base class for all errors raised by this package."""


class OrderOutOfRangeError(MaternImspeError, ValueError):
    """Raised when the Matérn order ``p`` is negative or exceeds ``P_MAX``."""


class DomainError(MaternImspeError, ValueError):
    """Raised for invalid hyperparameters, distances or coordinates."""


class DimensionMismatchError(MaternImspeError, ValueError):
    """Raised when the theta vector and the design disagree on dimension."""


class DesignParseError(MaternImspeError, ValueError):
    """Raised when a design CSV cannot be parsed or fails validation.

    ``line`` is the 1-based line number in the file, ``column`` the header
    name of the offending column (both ``None`` if not applicable).
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SingularDesignError(MaternImspeError, ArithmeticError):
    """Raised when the correlation matrix is singular or too ill-conditioned.

    ``rcond`` is the LAPACK reciprocal condition estimate (0.0 when the
    Cholesky factorization itself failed).
    """

    def __init__(self, message, rcond=0.0):
        super().__init__(message)
        self.rcond = rcond
