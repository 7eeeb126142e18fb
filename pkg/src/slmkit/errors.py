"""Exception hierarchy shared by the library and the CLI."""


class SlmError(Exception):
    """Base class for all errors raised by slmkit."""


class ShapeError(SlmError, ValueError):
    """Operands whose dimensions do not agree (a contract violation)."""


class InputError(SlmError, ValueError):
    """Input data that is malformed, e.g. non-finite entries."""


class ConfigError(SlmError, ValueError):
    """Invalid configuration or distribution parameters."""


class NumericalError(SlmError, ArithmeticError):
    """A computation produced an unusable result."""
