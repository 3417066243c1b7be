"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ContractError(TypeError):
    """An operation was handed an object in the wrong representation."""


class ResourceError(MemoryError):
    """A request exceeds a configured qubit-count guard."""


class NumericalError(ArithmeticError):
    """Quadrature or root bracketing failed to converge."""


class CalibrationError(RuntimeError):
    """No parameter setting satisfies the calibration conditions.

    ``result`` holds the best attempt (possibly ``None``) so that callers can
    inspect the residuals that were reached.
    """

    def __init__(self, message: str, result=None, best_residual: float | None = None):
        super().__init__(message)
        self.result = result
        if best_residual is None and result is not None:
            best_residual = result.max_residual
        self.best_residual = best_residual
