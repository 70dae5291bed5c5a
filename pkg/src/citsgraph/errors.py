"""Exception types shared across the package."""

from __future__ import annotations


class CitsGraphError(Exception):
    """Base class for all errors raised by citsgraph."""


class ParseError(CitsGraphError):
    """An input document is syntactically or structurally invalid.

    Covers JSON syntax errors (position-reported), missing required keys,
    wrong value kinds, and dangling references detected at load time.
    """


class UnknownIdError(CitsGraphError):
    """A query named an identifier that does not resolve."""


class ConditionError(CitsGraphError):
    """A condition or effect is malformed (unknown kind, wrong arity)."""
