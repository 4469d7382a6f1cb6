"""Exception types raised across the package."""


class OpinionError(Exception):
    """Base class for all package errors."""


class InvalidState(OpinionError, ValueError):
    """An array does not satisfy the invariants of the requested state type."""


class OutOfSimplex(InvalidState):
    """A deviation state maps to a point with negative opinion weights."""


class DimensionMismatch(OpinionError, ValueError):
    pass


class GroupTooLarge(OpinionError):
    """Subgroup enumeration exceeded the element cap."""


class SizeExceeded(OpinionError):
    """The ambient group is too large for brute-force enumeration."""


class IndexInconsistency(OpinionError):
    """Balance terms depend on the index choice, so the model is not equivariant."""


class DegenerateDenominator(OpinionError, ZeroDivisionError):
    """The critical-value formula has a non-positive denominator."""


class Diverged(OpinionError):
    """An integration left the bounded region the model guarantees."""


class ZeroState(OpinionError, ValueError):
    pass


class SchemaError(OpinionError, ValueError):
    """A scenario or model file failed validation."""
