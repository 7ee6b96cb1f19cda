"""Exception hierarchy.

Two families map onto CLI exit codes: :class:`UsageError` (exit 2) for bad
arguments or configuration, :class:`NumericalContractError` (exit 3) for a
numerical guarantee that could not be met.
"""

from __future__ import annotations


class UscGateError(Exception):
    """Base class for all package errors."""


class UsageError(UscGateError, ValueError):
    """Invalid argument, layout or configuration."""


class NumericalContractError(UscGateError, ArithmeticError):
    """A numerical precondition or postcondition was violated."""


class DimensionError(NumericalContractError):
    """Total Hilbert-space dimension exceeds the configured cap."""


class ContractViolation(NumericalContractError):
    """Input does not satisfy a structural contract (Hermiticity, PSD, ...)."""


class AccuracyError(NumericalContractError):
    """Requested accuracy is out of reach (norm too large, integrator failure)."""


class CutoffError(NumericalContractError):
    """Fock truncation too small for the simulated state.

    ``suggested_n_max`` carries a cutoff that should work, when one is known.
    """

    def __init__(self, message: str, suggested_n_max: int | None = None):
        super().__init__(message)
        self.suggested_n_max = suggested_n_max


class StepSizeError(NumericalContractError):
    """Integrator norm drift too large; retry with ``suggested_step``."""

    def __init__(self, message: str, suggested_step: float | None = None):
        super().__init__(message)
        self.suggested_step = suggested_step
