"""Exception hierarchy shared across the package.

Three failure families, matching the CLI exit codes: bad parameters or
configuration (2), malformed or inconsistent input data (3), and inputs that
are structurally fine but too thin to support the requested statistic (4).
"""


class CondCorrError(Exception):
    """Base class for all package errors."""


class ValidationError(CondCorrError, ValueError):
    """A parameter, configuration value, or call violates a precondition."""

    exit_code = 2


class DataError(CondCorrError, ValueError):
    """Input data is malformed, inconsistent, or out of domain."""

    exit_code = 3


class InsufficientDataError(CondCorrError, RuntimeError):
    """Valid inputs, but not enough usable samples for the statistic."""

    exit_code = 4
