"""Exception types raised by spinscatter."""

from __future__ import annotations


class SpinScatterError(Exception):
    """Base class for all package errors."""


class NotAxiallySymmetricError(SpinScatterError, ValueError):
    """Hamiltonian does not commute with the total z-projection."""

    def __init__(self, message: str, commutator_norm: float):
        super().__init__(message)
        self.commutator_norm = commutator_norm


class ClosedChannelError(SpinScatterError, ValueError):
    """The requested incoming channel carries no propagating wave."""


class ModelRejectedError(SpinScatterError, ValueError):
    """A model builder refused its parameters."""

    def __init__(self, message: str, off_diagonal: float = 0.0):
        super().__init__(message)
        self.off_diagonal = off_diagonal


class ConvergenceError(SpinScatterError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IllConditionedError(SpinScatterError, ArithmeticError):
    """Linear system is singular or too badly conditioned to trust."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class FluxConservationError(SpinScatterError, RuntimeError):
    """Transmitted plus reflected flux differs from the incoming flux."""

    def __init__(self, message: str, violation: float, outcome=None):
        super().__init__(message)
        self.violation = violation
        self.outcome = outcome


class UndefinedControlError(SpinScatterError, ValueError):
    """Logical-state control is undefined for the given transmissions."""
