from typing import Optional


class PolyvarError(Exception):
    """Base class for every error raised by polyvar."""


class DimensionMismatchError(PolyvarError):
    pass


class EmptySetError(PolyvarError):
    pass


class EmptyPolyhedronError(PolyvarError):
    pass


class NotConicalError(PolyvarError):
    pass


class NotEpigraphError(PolyvarError):
    pass


class MembershipError(PolyvarError):
    pass


class OffGraphError(MembershipError):
    """Raised when a derivative object is requested at a point outside the graph."""

    def __init__(self, message: str, distance=None):
        super().__init__(message if distance is None else f"{message} (distance {distance})")
        self.distance = distance


class HypothesisViolatedError(PolyvarError):
    pass


class LimitExceededError(PolyvarError):
    pass


class InfiniteValueError(PolyvarError):
    pass


class StratumBoundaryError(PolyvarError):
    def __init__(self, message: str = "stratum boundary; refine instance"):
        super().__init__(message)


class InstanceError(PolyvarError):
    """Schema or name-resolution failure in an instance file."""

    def __init__(self, message: str, name: Optional[str] = None):
        super().__init__(f"{name}: {message}" if name else message)
        self.name = name


class ConsistencyError(PolyvarError):
    """Exact results contradict theory or the sampling oracle."""
