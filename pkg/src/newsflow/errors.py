"""Exception hierarchy.

Every error raised by this package derives from :class:`NewsflowError`, so
callers can catch one type at the CLI boundary.  The CLI maps subclasses to
exit codes (config 2, data 3, numeric/domain 4).
"""


class NewsflowError(Exception):
    """Base class for all package errors."""


class DomainError(NewsflowError, ValueError):
    """A precondition on an operation's inputs was violated."""


class SupportError(DomainError):
    """KLD requested where the second distribution lacks support."""


class EmptyWindowError(DomainError):
    """A date window intersects the corpus span but contains no rows."""


class EmptyCurveError(NewsflowError):
    """No offset of a jump grid was supported by the corpus."""


class CoverageError(NewsflowError):
    """An event is not covered by a corpus well enough to extract a flow."""


class IngestionError(NewsflowError):
    """An input file failed validation; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(NewsflowError):
    """Invalid run configuration."""
