"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes: configuration and domain
problems exit with 2, numerical failures with 3.
"""

from __future__ import annotations


class MkdvError(Exception):
    """Base class for all library errors."""


class DomainError(MkdvError, ValueError):
    """An argument lies outside the admissible set of a formula."""


class ConfigError(MkdvError, ValueError):
    """A run configuration is inconsistent or incomplete."""


class SingularityError(MkdvError, ZeroDivisionError):
    """Evaluation was requested at a pole or a vanishing denominator."""


class AccuracyError(MkdvError, ArithmeticError):
    """A quadrature or iterative solve missed its tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class BlowUpError(MkdvError, FloatingPointError):
    """The time integrator produced non-finite values."""

    def __init__(self, message: str, last_stable_t: float):
        super().__init__(message)
        self.last_stable_t = last_stable_t


class UnsupportedError(ConfigError):
    """The requested combination is valid mathematically but not implemented."""


class TransitionZoneError(DomainError):
    """The ray lies in a transition zone where no uniform formula applies."""


class TrappedBreatherWarning(UserWarning):
    """A breather sits inside the oscillation zone; its correction is omitted."""

    def __init__(self, message: str, index: int, xi: float):
        super().__init__(message)
        self.index = index
        self.xi = xi
