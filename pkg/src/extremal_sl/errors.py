"""Exception hierarchy for extremal-sl."""

from __future__ import annotations


class ExtremalSLError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ExtremalSLError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class DomainError(ExtremalSLError, ValueError):
    """Function values lie outside the domain of an operation."""


class EmptyWindowError(DomainError):
    """The profile f_alpha has no positivity window (alpha <= alpha_min)."""


class ConvergenceError(ExtremalSLError, RuntimeError):
    """An iterative procedure exhausted its budget or failed a cross-check."""
