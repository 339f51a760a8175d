"""
Exceptions raised by the memsched package.

Every error a user can trigger derives from MemschedError so the CLI and the
HTTP service can turn it into a one-line diagnostic.
"""


class MemschedError(Exception):
    """Base class for all memsched errors"""


class ParseError(MemschedError):
    """Malformed text in one of the line-oriented input formats"""

    def __init__(self, reason, line=None, source=None):
        self.reason = reason
        self.line = line
        self.source = source
        super().__init__(self.describe())

    def describe(self):
        location = self.source or "<input>"
        if self.line is not None:
            location = f"{location}:{self.line}"
        return f"{location}: {self.reason}"

    def with_source(self, source):
        """Return a copy of this error that names the file it came from."""
        return type(self)(self.reason, line=self.line, source=source)


class ValidationError(ParseError):
    """Input that tokenizes fine but breaks a semantic invariant"""


class CoverageError(MemschedError):
    """The memory map leaves symbols of the graph unplaced"""

    def __init__(self, report):
        self.report = report
        missing = ", ".join(report.missing)
        super().__init__(f"unmapped symbol(s): {missing}")


class InfeasibleError(MemschedError):
    """No schedule exists (or the list scheduler cannot find one) within the horizon"""

    def __init__(self, reason, cycle=None, vertices=(), path=()):
        self.reason = reason
        self.cycle = cycle
        self.vertices = tuple(vertices)
        self.path = tuple(path)
        message = reason
        if cycle is not None:
            message += f" at cycle {cycle}"
        if self.vertices:
            message += f" (vertices: {', '.join(self.vertices)})"
        if self.path:
            message += f" (path: {' -> '.join(self.path)})"
        super().__init__(message)


class TransferClashError(InfeasibleError):
    """A declared transfer finds no free port on one of its banks"""


class TokenPoolExhausted(MemschedError):
    """A token was taken from a pool with no idle token left"""


class InstanceTooLargeError(MemschedError):
    """The exhaustive oracle refuses graphs above its size guard"""
