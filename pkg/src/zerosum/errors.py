"""Exception types shared across the package."""

from __future__ import annotations


class ZerosumError(Exception):
    """Base class for package-specific errors."""


class GroupSpecError(ZerosumError, ValueError):
    """Malformed group specification text."""


class SequenceFormatError(ZerosumError, ValueError):
    """A sequence file violates the schema or the expected group."""


class ResourceCapExceeded(ZerosumError):
    """A computation would exceed the configured work budget."""

    def __init__(self, message: str, *, estimated: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.estimated = estimated
        self.cap = cap


class PremiseViolation(ZerosumError):
    """An extraction was invoked on input that does not satisfy its premise."""

    def __init__(self, message: str, *, report: object = None):
        super().__init__(message)
        self.report = report


class CounterexampleCandidate(ZerosumError):
    """A search that established mathematics guarantees to succeed came back empty.

    Carries a JSON-serializable artifact describing the offending instance so the
    failure can be reproduced and inspected.  Raising this is always a serious
    event: either a genuine counterexample or an internal inconsistency.
    """

    def __init__(self, message: str, artifact: dict):
        super().__init__(message)
        self.artifact = artifact
