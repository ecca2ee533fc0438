"""Exception types raised across the package."""


class ReachflowError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(ReachflowError):
    """Point dimension does not match the ambient dimension."""


class OutsideReachTube(ReachflowError):
    """Closest-point projection is ambiguous (equidistant candidates)."""


class NotOnDomain(ReachflowError):
    """A point expected to lie on the domain does not (beyond tolerance)."""


class InvalidResolution(ReachflowError):
    """Boundary sampling resolution is too coarse or malformed."""


class NonFiniteState(ReachflowError):
    """A particle coordinate became NaN or infinite (step size too large)."""


class LinesearchFailed(ReachflowError):
    """Backtracking exhausted its halving budget without an energy decrease."""


class SizeMismatch(ReachflowError):
    """Two point sets that must have equal cardinality do not."""


class SizeTooLarge(ReachflowError):
    """Input too large for an enumeration-based routine."""


class EmptySample(ReachflowError):
    """An initial-condition filter removed every candidate point."""


class InvalidSweep(ReachflowError):
    """A parameter sweep request is degenerate or inconsistent."""


class UnknownFigure(ReachflowError):
    """Requested canned experiment does not exist."""


class SchemaError(ReachflowError):
    """A scenario/config document failed validation."""
