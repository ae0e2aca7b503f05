"""Exception types shared across the toolkit.

Every error carries a stable machine-readable ``code`` so callers (and the
CLI) can dispatch on failure kind without parsing messages.
"""

from __future__ import annotations


class BnkitError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, code: str, message: str, location: str | None = None):
        self.code = code
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


class ModelError(BnkitError):
    """Structural or numeric defect in a network or potential."""


class EngineError(BnkitError):
    """Domain failure inside an inference engine (impossible evidence,
    non-polytree input, exhausted samples, oversized enumeration)."""


class FormatError(BnkitError):
    """Unreadable or ill-formed knowledge-base document."""
