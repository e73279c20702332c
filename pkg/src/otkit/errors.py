"""Solver-level exceptions shared across modules."""
from __future__ import annotations


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver stops without meeting its tolerance.

    ``partial`` carries whatever the solver had computed when it stopped.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InfeasibleMarginalsError(ValueError):
    pass


class InvalidCostError(ValueError):
    pass


class UnderflowError(ArithmeticError):
    """Kernel products fell below the positive floor; retry in the log domain."""


class GeometryError(ValueError):
    pass


class StateError(RuntimeError):
    pass
