# src/reviewpriv/exceptions.py

class ReviewPrivError(Exception):
    """Base class for every error raised deliberately by reviewpriv."""

class InstanceError(ReviewPrivError, ValueError):
    """Public weights, loads or an assignment are malformed or mutually inconsistent."""

class InstanceTooLargeError(InstanceError):
    """An instance exceeds a configured enumeration cap (tuple count or oracle size)."""

class InconsistentPublicDataError(InstanceError):
    """The bound scans cannot produce n consistent bounds; no valid assignment exists."""

class SamplingError(ReviewPrivError, RuntimeError):
    """The random assignment sampler exhausted its rejection attempts."""

class ConvergenceError(ReviewPrivError, RuntimeError):
    """A projection solver did not reach its tolerance, or its feasible set is empty."""
