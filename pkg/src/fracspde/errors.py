"""Exception hierarchy shared by all modules."""


class FracSPDEError(Exception):
    """Base class for package errors."""


class DomainError(FracSPDEError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(FracSPDEError, ValueError):
    """An experiment configuration is malformed or violates a standing hypothesis."""


class NumericalError(FracSPDEError, ArithmeticError):
    """A numerical procedure failed (factorization, blow-up, non-convergence).

    ``diagnostics`` carries whatever the failing routine knew at the time,
    e.g. a condition number or an iteration history.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
