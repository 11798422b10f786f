"""Exception types shared across the package."""


class MetroscopeError(Exception):
    """Base class for every error raised by metroscope."""


class DimensionError(MetroscopeError, ValueError):
    """Mode counts or weight vectors do not line up."""


class TermCountOverflow(MetroscopeError, ValueError):
    """A separable expansion would exceed the configured term cap."""


class TruncationOverflow(MetroscopeError, ArithmeticError):
    """The series tail bound did not reach epsilon within the hard cap."""

    def __init__(self, message: str, achieved_bound: float):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class NoCrossing(MetroscopeError):
    """The distinguishability never dropped to the threshold inside the search window."""

    def __init__(self, message: str, min_d: float):
        super().__init__(message)
        self.min_d = min_d


class NotCovered(MetroscopeError, ValueError):
    """No closed-form prediction exists for this family/scenario pair."""


class Indistinguishable(MetroscopeError, ZeroDivisionError):
    """d >= 1: the Cramer-Rao right-hand side diverges."""
