"""Exception types shared across the package."""


class DeconvError(Exception):
    """Base class for all package errors."""


class DomainError(DeconvError, ValueError):
    """Argument outside the mathematical domain of a function."""


class OverflowGuard(DeconvError, ArithmeticError):
    """The exponent 1/(mu h^lambda) exceeds the double-precision guard."""


class TheoremInapplicable(DeconvError):
    """The limit theorem requires lambda == 2 for the error model."""


class QuadratureError(DeconvError, ValueError):
    pass


class GridTooCoarse(DeconvError, ValueError):
    pass


class ConfigError(DeconvError, ValueError):
    """Malformed or inconsistent configuration / input data."""
