"""
errors.py
---------
Exception hierarchy for the toolkit. Each class carries the process exit
code the command-line front end reports for it.
"""


class IrsaError(Exception):
    exit_code = 1


class ValidationError(IrsaError, ValueError):
    exit_code = 2


class DomainError(ValidationError):
    """Argument outside the function's domain (e.g. p >= 1 in a log term)."""


class DegenerateDistributionError(ValidationError):
    """Mean degree is zero, so the edge perspective is undefined."""


class ConfigError(ValidationError):
    """Simulation parameters that cannot produce a valid frame."""


class FileAccessError(IrsaError, OSError):
    exit_code = 3


class BracketError(IrsaError):
    exit_code = 4


class ConvergenceError(IrsaError):
    exit_code = 4
