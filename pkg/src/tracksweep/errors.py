"""Exception types raised across the package."""


class TrackSweepError(Exception):
    """Base class for all package errors."""


class EmptyInput(TrackSweepError, ValueError):
    """An operation that needs at least one point received none."""


class Parallel(TrackSweepError, ArithmeticError):
    """Two lines with equal slope have no unique intersection."""


class DegenerateAbscissa(TrackSweepError, ValueError):
    """All points share one abscissa, so no finite-slope fit is unique."""


class CorruptState(TrackSweepError, RuntimeError):
    """The sweep popped a pair of lines that are no longer adjacent."""


class TooLarge(TrackSweepError, ValueError):
    """The exhaustive enumerator refused an input above its size guard."""

    def __init__(self, estimate, limit):
        super().__init__(
            f"subset count estimate {estimate:.3g} exceeds the guard of {limit:.3g}")
        self.estimate = estimate
        self.limit = limit


class InfeasibleConfig(TrackSweepError, ValueError):
    """Scene generation could not satisfy its own ground-truth invariants."""


class ParseError(TrackSweepError, ValueError):
    """Malformed input file; carries the 1-based line and the column name."""

    def __init__(self, message, line=None, column=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        text = message if not where else f"{message} ({', '.join(where)})"
        super().__init__(text)
        self.line = line
        self.column = column


class SchemaError(TrackSweepError, ValueError):
    """A structurally valid file violates the expected schema."""
