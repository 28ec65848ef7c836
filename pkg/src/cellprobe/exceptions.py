"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Array dimensions disagree with what an operation expects."""

    def __init__(self, what, expected, actual):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected shape {expected}, got {actual}")


class NonFiniteError(ValueError):
    """Input contains NaN or infinite values."""


class ModelFormatError(ValueError):
    """A model file is malformed, truncated or of an unknown version."""


class NumericalError(ArithmeticError):
    """Training diverged or produced a non-finite loss."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])
