"""Exception hierarchy shared by every module.

The CLI maps :class:`ResourceError` to exit status 2 and every other
:class:`CharpError` to exit status 1.
"""

from __future__ import annotations


class CharpError(Exception):
    """Base class for all errors raised by this package."""

    prefix = "error"


class UsageError(CharpError, ValueError):
    """Bad arguments: mismatched fields, violated preconditions, wrong arity."""

    prefix = "usage error"


class ParseError(UsageError):
    """A text file violates one of the line-oriented grammars."""

    prefix = "parse error"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(CharpError, ValueError):
    """The input is well formed but outside the mathematical domain of an op."""

    prefix = "domain error"


class ResourceError(CharpError, RuntimeError):
    """A configured cap (degree, term count, blow-up) would be exceeded."""

    prefix = "resource error"


class IntegrityError(CharpError, RuntimeError):
    """An internal cross-check against ground truth failed."""

    prefix = "integrity error"
