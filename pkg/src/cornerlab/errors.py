"""Exception hierarchy shared by every module of the package."""


class CornerLabError(Exception):
    """Base class for all package errors."""


class OutOfRange(CornerLabError, IndexError):
    """An edge, face or index lies outside the generated window."""


class WindowEscape(CornerLabError):
    """A traced component reached the window boundary before closing.

    Attributes
    ----------
    length : int
        Number of edges walked before the escape.
    bbox : tuple of int
        ``(xmin, xmax, ymin, ymax)`` of the vertices visited so far.
    """

    def __init__(self, msg, length=0, bbox=None):
        super().__init__(msg)
        self.length = length
        self.bbox = bbox


class BudgetExceeded(CornerLabError):
    """Adaptive window growth hit the configured maximum window."""

    def __init__(self, msg, max_window=None, partial=None):
        super().__init__(msg)
        self.max_window = max_window
        self.partial = partial


class CorruptConfiguration(CornerLabError, AssertionError):
    """A vertex with degree other than two was found while tracing."""


class BijectionViolation(CornerLabError, AssertionError):
    """A traced cycle does not match the excursion-pair description."""


class AlgorithmViolation(CornerLabError, AssertionError):
    """The hikers' path rule reached a state it should never reach."""


class InsufficientData(CornerLabError, ValueError):
    """Not enough samples or points to compute the requested statistic."""


class InvalidGeometry(CornerLabError, ValueError):
    """A line family does not assign an integer index to every vertex."""


class RenderRefused(CornerLabError):
    """The requested drawing would exceed the pixel budget."""

    def __init__(self, msg, needed=None, budget=None):
        super().__init__(msg)
        self.needed = needed
        self.budget = budget
