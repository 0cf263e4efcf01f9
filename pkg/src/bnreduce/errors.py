"""Exception hierarchy shared by all modules."""


class BnReduceError(Exception):
    """Base class for every error raised by the package."""


class NetworkError(BnReduceError, ValueError):
    """A network (or rule, or graph) violates a structural invariant."""


class ParseError(NetworkError):
    """Malformed network document; carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SizeLimit(BnReduceError):
    """The requested exhaustive computation exceeds the supported size."""


class NotDominant(BnReduceError, ValueError):
    """The vertex set does not meet every cycle of the graph."""


class DepthExceeded(BnReduceError, AssertionError):
    """History reconstruction asked for a time slice beyond the recurrence length.

    Cannot happen for a genuinely dominant set; signals an internal bug.
    """


class MismatchedSystems(BnReduceError, ValueError):
    """The conjugacy pairs do not link the two landscapes that were supplied."""


class BoundViolation(BnReduceError, AssertionError):
    """A proven inequality failed on concrete data (implementation bug)."""
