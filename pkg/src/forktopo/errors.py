"""Exception hierarchy shared by all forktopo modules."""

from __future__ import annotations


class ForkTopoError(Exception):
    """Base class for every error raised by this package."""


class MissingFork(ForkTopoError, KeyError):
    pass


class MissingCluster(ForkTopoError, KeyError):
    pass


class MissingTransaction(ForkTopoError, KeyError):
    pass


class InvalidConfig(ForkTopoError, ValueError):
    pass


class OutOfRange(ForkTopoError, IndexError):
    pass


class TraceFormatError(ForkTopoError, ValueError):
    pass


class EmptySpace(ForkTopoError, ValueError):
    pass


class UnknownPoint(ForkTopoError, KeyError):
    pass


class NotASubset(ForkTopoError, ValueError):
    pass


class SizeMismatch(ForkTopoError, ValueError):
    pass


class DomainMismatch(ForkTopoError, ValueError):
    pass


class UndefinedDistance(ForkTopoError, ValueError):
    """A distance has no value for this pair of points.

    Metric verification and ball construction treat these as skipped pairs
    rather than failures.
    """


class PendingOutcome(UndefinedDistance):
    pass


class NeverDiverged(UndefinedDistance):
    pass


class EmptyGraphPoint(UndefinedDistance):
    """A fork-space point is the empty image of a cluster that never forked."""


class ScenarioError(ForkTopoError, ValueError):
    """Scenario document rejected; ``field`` and ``line`` locate the problem."""

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class MalformedDocument(ScenarioError):
    pass


class MissingField(ScenarioError):
    pass


class BadProbabilities(ScenarioError):
    pass


class BadReference(ScenarioError):
    pass
