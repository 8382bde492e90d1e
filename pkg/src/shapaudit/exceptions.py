"""Exception hierarchy shared by every subpackage.

Each class carries the process exit code the ``audit`` CLI maps it to.
"""


class AuditError(Exception):
    exit_code = 1


class ConfigError(AuditError, ValueError):
    """Invalid configuration, hyperparameters or call arguments."""

    exit_code = 2


class UsageError(ConfigError):
    """An API was called with inputs that violate its contract."""


class DataError(AuditError, ValueError):
    """Malformed, missing or degenerate input data."""

    exit_code = 3


class NumericError(AuditError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""

    exit_code = 4


class ConvergenceWarning(UserWarning):
    pass
