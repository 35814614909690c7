"""Exception types shared across the package."""

from __future__ import annotations


class InvalidInputError(ValueError):
    """Arguments violate a documented precondition."""


class NumericalError(ArithmeticError):
    """An iterative method failed to converge."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class SingularityError(NumericalError):
    """A quantity is undefined at ``time`` (typically a zero of the parity function)."""

    def __init__(self, message: str, time: float | None = None, **diagnostics):
        super().__init__(message, time=time, **diagnostics)
        self.time = time


class DivergenceError(NumericalError):
    """Adaptive quadrature did not converge; the integrand may be singular."""


class InsufficientSamplesError(RuntimeError):
    """A conditioning event occurred too rarely for a meaningful estimate."""

    def __init__(self, message: str, count: int, required: int):
        super().__init__(message)
        self.count = count
        self.required = required


class ConsistencyError(RuntimeError):
    """An internal invariant that theory guarantees was found violated."""


class UndefinedPropagatorError(SingularityError):
    """The intermediate propagator from ``time`` does not exist (its inverse is singular)."""
