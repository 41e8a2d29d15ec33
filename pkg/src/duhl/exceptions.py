class LibsvmFormatError(ValueError):
    """A line of a LIBSVM file could not be parsed."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class DimensionError(ValueError):
    """A feature index exceeds the declared dimension."""


class GapInconsistencyError(ArithmeticError):
    """A coordinate gap came out clearly negative; the dual point is stale."""


class NumericalError(ArithmeticError):
    """A run produced a non-finite objective or gap."""


class ConvergenceError(RuntimeError):
    """The reference solver hit its work cap without a tight certificate."""
