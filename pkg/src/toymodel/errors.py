"""Exception hierarchy shared by every module.

``ToyModelError`` marks a domain violation (CLI exit status 2).
``FormatError`` marks a malformed input file (CLI exit status 1).
"""


class ToyModelError(ValueError):
    """Base class for domain errors."""


class FieldError(ToyModelError):
    """Bad modulus, modulus mismatch, or inversion of zero."""


class InvalidStateError(ToyModelError):
    """A distribution or fiducial set violates its invariants."""


class MeasureDomainError(ToyModelError):
    """The predictability measure is undefined for this (state, r) pair."""


class TargetRangeError(ToyModelError):
    """solve_r target lies outside the attainable range of M_r."""


class ConstantMeasureError(TargetRangeError):
    """M_r does not depend on r for this state, so r is not determined."""


class UndefinedByModelError(ToyModelError):
    """The model assigns no outcome probability to this input."""


class InfeasibleError(ToyModelError):
    """No pure state exists for the given free fiducial values."""


class FormatError(Exception):
    """Malformed state, measurement, or scenario file."""
