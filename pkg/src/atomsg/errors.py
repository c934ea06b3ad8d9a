"""Exception hierarchy. CLI exit codes hang off these classes."""


class AtomsgError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(AtomsgError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class CapabilityError(AtomsgError, ValueError):
    """Request exceeds a supported size limit."""

    exit_code = 2


class ConfigError(AtomsgError, ValueError):
    """Malformed or inconsistent configuration."""

    exit_code = 2

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ConvergenceError(AtomsgError, ArithmeticError):
    """Numerical procedure failed to reach its tolerance.

    Carries the best available estimate and its error bound so callers can
    still report partial results.
    """

    exit_code = 3

    def __init__(self, message, estimate=None, bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class StabilityError(ConfigError):
    """Time step too large for the configured grids."""

    exit_code = 4


class NumericalBlowupError(AtomsgError, ArithmeticError):
    """Non-finite values appeared mid-run."""

    exit_code = 3

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good
