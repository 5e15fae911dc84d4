"""Exception and warning types shared across the package."""


class ParamError(ValueError):
    """A parameter lies outside the admissible regime of its family."""


class SizeError(ValueError):
    """An input size is degenerate (n = 0) or beyond a combinatorial guard."""


class NumericalError(ArithmeticError):
    """A computation lost too much precision to be trusted."""


class ConfigError(Exception):
    """A run configuration is malformed or references missing resources."""


class TruncationWarning(UserWarning):
    """An infinite series was cut off before its tail bound was met."""
