"""Exception types raised across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input (shape mismatch, negative weights, ...)."""


class DomainError(ValueError):
    """Input outside the domain where a formula is valid."""


class TruncationError(RuntimeError):
    """Grid window loses more probability mass than allowed."""


class DegenerateInputError(ValueError):
    """Quotient with vanishing denominator (constant test function)."""


class SolverError(RuntimeError):
    """Iterative eigensolver failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OptimizationError(RuntimeError):
    """Every restart of an ascent was degenerate."""
