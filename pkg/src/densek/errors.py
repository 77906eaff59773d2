"""Semantic exception hierarchy.

Domain violations (bad arguments) are ValueErrors so they play well with
argparse-driven tooling; resource and hypothesis failures get their own
branches because experiment code needs to tell them apart from bad input.
"""


class DensekError(Exception):
    """Base class for all package errors."""


class DomainError(DensekError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class InvalidDimensionError(DomainError):
    """n or K outside the allowed range (e.g. K > n, n < 2)."""


class InvalidVertexError(DomainError):
    """A vertex id is outside [0, n)."""


class InfeasibleOverlapError(DomainError):
    """No K-set with the requested planted overlap exists."""


class MissingPlantError(DensekError):
    """An overlap-restricted operation was called on an unplanted matrix."""


class ResourceLimitError(DensekError):
    """Exact enumeration was requested beyond the feasible size limit."""


class HypothesisViolatedError(DensekError):
    """Inputs violate the hypothesis of the bound or theorem being evaluated.

    Distinct from DomainError: the computation would be well defined
    numerically but the mathematical statement does not cover it.
    """


class SchemaError(DensekError):
    """A config or results file does not match the expected versioned schema."""
