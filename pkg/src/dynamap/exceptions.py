"""Exception hierarchy shared by all dynamap modules."""


class DynamapError(Exception):
    """Base class for all dynamap failures."""


class InputError(DynamapError, ValueError):
    """Invalid caller-supplied data (shapes, ranges, non-finite values)."""


class CorrespondenceError(InputError):
    """Two objects that must share a sample set have mismatched sizes."""


class DegeneracyError(DynamapError):
    """Degenerate structure: zero degrees, all-zero distances, collapsed bandwidth."""


class CalibrationError(DynamapError):
    """Bandwidth search could not hit the requested second eigenvalue."""

    def __init__(self, message, achieved_range=None):
        super().__init__(message)
        self.achieved_range = achieved_range


class ConnectivityError(DynamapError):
    """Asymptotic formulas require a connected graph (simple top eigenvalue)."""


class NumericalError(DynamapError):
    """Eigensolver failure or a residual beyond acceptable roundoff."""
