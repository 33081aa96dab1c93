"""Exception types shared across the package."""


class PolyvolError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PolyvolError):
    """A polytope file could not be parsed."""


class NumericError(PolyvolError):
    """A numeric routine failed (singular system, lost rank, no convergence)."""


class LpFailure(NumericError):
    """The simplex solver hit its cycling guard or a singular basis refresh."""


class ScheduleFailure(PolyvolError):
    """The annealing schedule exceeded its probe budget without terminating.

    Carries the diagnostics collected so far in ``self.diagnostics``.
    """

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics if diagnostics is not None else []
