"""Exception hierarchy shared by every module."""


class MeasureError(ValueError):
    """Base class for all errors raised by rndcalc."""


class StructuralError(MeasureError):
    """Objects live on incompatible spaces or have mismatched shapes."""


class CapacityError(MeasureError):
    """A construction would exceed the dense-array size limit."""


class DomainError(MeasureError):
    """A mathematical precondition (absolute continuity, positivity, ...) fails.

    ``witness`` names the offending point (or link/index) when one exists.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsatisfiableError(MeasureError):
    """A fixture request asks for constraints no instance can meet."""
