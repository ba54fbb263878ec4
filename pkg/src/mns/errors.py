"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary domain/shape violations; the
classes here exist where callers need to react programmatically (parse
location, partial results on resource exhaustion, Fock-cutoff safety).
"""

from __future__ import annotations


class CircuitParseError(ValueError):
    """Raised when an IQP circuit file cannot be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ResourceLimitError(RuntimeError):
    """Raised when an estimate or dense object would exceed a stated cap.

    ``partial`` holds whatever lower bound or partial result was reached
    before aborting (``None`` if nothing useful was computed).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class CutoffError(ValueError):
    """Raised when a Fock-space cutoff is too small to be trustworthy."""
