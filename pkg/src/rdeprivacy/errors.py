"""Exception types shared across the package.

The CLI maps each class to a distinct exit code, so library code should raise
the most specific one that applies.
"""


class ValidationError(ValueError):
    """Malformed probability data (negative mass, bad normalization, shapes)."""


class DataError(ValueError):
    """Problems with user-supplied databases, channels or config files."""


class DomainError(ValueError):
    """A distortion (or other scalar) outside the admissible interval.

    ``interval`` is the closed admissible range ``(lo, hi)`` when known.
    """

    def __init__(self, message, value=None, interval=None):
        super().__init__(message)
        self.value = value
        self.interval = interval


class CapExceededError(RuntimeError):
    """A hard size cap (codebook size, enumeration space) would be exceeded."""

    def __init__(self, message, requested=None, cap=None):
        super().__init__(message)
        self.requested = requested
        self.cap = cap


class ConvergenceError(RuntimeError):
    """Iterative solver hit its iteration cap; carries the best iterate."""

    def __init__(self, message, best=None, gap=None):
        super().__init__(message)
        self.best = best
        self.gap = gap
