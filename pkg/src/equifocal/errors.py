"""Exception hierarchy shared by all modules."""


class EquifocalError(Exception):
    """Base class for every error raised by the package."""


class InputError(EquifocalError, ValueError):
    """Arguments have the wrong shape or lie outside the expected subspace."""


class ValidationError(EquifocalError):
    """A structural invariant failed; ``residual`` holds the worst offender."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateError(EquifocalError, ValueError):
    """Zero direction, zero orbit, or a trivial symmetric pair."""


class AccuracyError(EquifocalError):
    """Numerical integration drifted past its tolerance."""

    def __init__(self, message, suggested_step=None):
        super().__init__(message)
        self.suggested_step = suggested_step


class TubeRadiusError(EquifocalError, ValueError):
    """A normal vector is not shorter than the tube radius."""


class PreconditionError(EquifocalError):
    """An operation was called outside the hypotheses it relies on."""


class DependencyError(EquifocalError):
    """A required upstream object has not been built."""


class ResolutionError(EquifocalError):
    """Two focal events are closer than the scan can separate."""


class ConsistencyError(EquifocalError):
    """A map that must be well defined produced two different values."""


class DecompositionUnstableError(EquifocalError):
    """Commutant eigenvalues stayed degenerate across all retries."""


class UsageError(EquifocalError):
    """Bad scenario file or unknown scenario name."""
