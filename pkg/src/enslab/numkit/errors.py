"""Exceptions raised by the numerical kernel."""


class NumkitError(Exception):
    """Base class for numerical kernel failures."""


class DimensionMismatch(NumkitError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(NumkitError):
    """A matrix required to be positive (semi-)definite is not."""


class NoConvergence(NumkitError):
    """An iterative routine exhausted its iteration budget."""
