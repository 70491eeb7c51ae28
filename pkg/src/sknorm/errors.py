"""
Exception types raised by scikit-norm.

Input problems derive from :class:`NormInputError` (itself a ``ValueError``);
exhausted budgets raise :class:`ResourceLimitExceeded`, which is never used
to signal unsatisfiability.
"""

from __future__ import annotations


class NormInputError(ValueError):
    """Base class for malformed or inconsistent user input."""


class FormulaSyntaxError(NormInputError):
    """
    A formula could not be parsed.

    Parameters
    ----------
    message : str
        Description of the problem.
    position : int
        Zero-based character offset in the source text.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnknownAtomError(NormInputError):
    """A formula mentions a proposition outside its vocabulary."""

    def __init__(self, atom: str):
        super().__init__(f"unknown atom '{atom}'")
        self.atom = atom


class VocabularyMismatchError(NormInputError):
    """Objects built over different vocabularies were combined."""


class TraceFormatError(NormInputError):
    """A trace document violates the trace file format."""


class NormFormatError(NormInputError):
    """A norm document violates the norm file format."""


class ConfigError(NormInputError):
    """A configuration file is malformed."""


class InvalidSolutionError(NormInputError):
    """A triple handed to a converter does not classify its traces."""


class ResourceLimitExceeded(RuntimeError):
    """A configured solver, enumeration or oracle budget ran out."""
