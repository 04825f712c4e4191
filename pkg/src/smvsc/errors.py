"""Exception hierarchy shared by all stages."""


class SMVSCError(Exception):
    """Base class for every error raised by this package."""


class DataError(SMVSCError):
    """Malformed, missing or inconsistent input files."""


class ConfigError(SMVSCError, ValueError):
    """Invalid parameter values."""


class NumericalError(SMVSCError, ArithmeticError):
    """A numerical precondition failed (isolated node, rank deficiency, ...)."""
