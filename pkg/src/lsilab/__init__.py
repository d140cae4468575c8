"""Poincare and log-Sobolev constants of mixtures: closed-form bounds,
spectral and variational estimates on the line, and exact ground truth on
the hypercube."""
from . import bounds, hypercube, measures, spectral1d, variational
from .errors import (
    DegenerateInputError,
    DomainError,
    InputError,
    OptimizationError,
    SolverError,
    TruncationError,
)

__version__ = "0.1.0"

__all__ = [
    "bounds", "hypercube", "measures", "spectral1d", "variational",
    "DegenerateInputError", "DomainError", "InputError", "OptimizationError",
    "SolverError", "TruncationError",
]
