"""Exception types shared across the package."""

from __future__ import annotations


class CommingleError(Exception):
    """Base class for every error raised by this package."""


class InvalidSignalError(CommingleError, ValueError):
    """A signal, blur or grid does not satisfy its invariants."""


class AmplitudeOverflowError(CommingleError, OverflowError):
    """A quantized amplitude exceeds the configured magnitude cap."""


class RegimeViolation(CommingleError):
    """The low-blur structural assumptions do not hold for an instance."""


class UnsupportedCaseError(CommingleError):
    """Geometry outside the closed-form tables that are implemented."""


class IdenticalSequencesError(CommingleError, ValueError):
    """Both difference sequences passed to the parser are the same."""


class InconsistentSequencesError(CommingleError, ValueError):
    """Two difference sequences cannot come from one signal."""
