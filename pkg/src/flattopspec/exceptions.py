"""Package-wide exception types."""


class FlatTopSpecError(Exception):
    """Base class for all errors raised by flattopspec."""


class OrderError(FlatTopSpecError, ValueError):
    """Requested cumulant/spectral order is unsupported."""


class DegenerateSeriesError(FlatTopSpecError, ValueError):
    """Input series is degenerate (e.g. zero variance)."""


class MissingReferenceError(FlatTopSpecError, RuntimeError):
    """A simulation-based reference table is required but not available."""
