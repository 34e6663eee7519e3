"""
errors.py

Exception hierarchy. Every failure coarsekit raises on purpose is a
CoarseKitError, so callers (and the command line) can separate bad input from
bugs. Negative mathematical verdicts are never raised: they come back as
certificates and reports.
"""


class CoarseKitError(ValueError):
    """Base class for input, precondition and capacity errors."""


class ConfigError(CoarseKitError):
    pass


class SchemaError(CoarseKitError):
    """A JSON document does not have the expected shape."""


class InvalidParameter(CoarseKitError):
    pass


class InvalidMetric(CoarseKitError):
    def __init__(self, violations):
        self.violations = list(violations)
        shown = ", ".join(str(v) for v in self.violations[:5])
        super().__init__(f"Matrix is not an integer metric: {shown}")


class DisconnectedGraph(CoarseKitError):
    def __init__(self, u: int, v: int):
        self.pair = (u, v)
        super().__init__(f"Graph is disconnected: no path between {u} and {v}")


class PointOutOfRange(CoarseKitError):
    pass


class EmptyUnion(CoarseKitError):
    pass


class EmptySet(CoarseKitError):
    pass


class FullSet(CoarseKitError):
    pass


class TooLarge(CoarseKitError):
    def __init__(self, size: int, cap: int, advice: str = ""):
        self.size = size
        self.cap = cap
        message = f"{size} points exceeds the exact-enumeration cap {cap}"
        if advice:
            message = f"{message}; {advice}"
        super().__init__(message)


class UnequalSides(CoarseKitError):
    pass


class NotBipartite(CoarseKitError):
    pass


class EmptyRange(CoarseKitError):
    pass


class DomainMismatch(CoarseKitError):
    pass


class Impossible(CoarseKitError):
    pass


class SizeMismatch(CoarseKitError):
    pass


class PreconditionViolated(CoarseKitError):
    def __init__(self, component: int, message: str):
        self.component = component
        super().__init__(f"component {component}: {message}")


class ConditionNotMet(CoarseKitError):
    pass


class MatchingFailed(CoarseKitError):
    def __init__(self, component: int, certificate):
        self.component = component
        self.certificate = certificate
        super().__init__(
            f"No perfect matching for component {component}: "
            f"{len(certificate.subset)} points share {certificate.union_size} candidates"
        )


class NotInjective(CoarseKitError):
    def __init__(self, first, second, value):
        self.pair = (first, second)
        self.value = value
        super().__init__(f"{first} and {second} both map to {value}")


class NonpositiveH(CoarseKitError):
    pass


class BadLabeling(CoarseKitError):
    pass


class InfeasibleDegree(CoarseKitError):
    pass


class RetriesExhausted(CoarseKitError):
    pass
