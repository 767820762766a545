"""Exception hierarchy shared by every module of the package."""


class HrchError(Exception):
    """Base class for all errors raised by ``hrch``."""


class DomainError(HrchError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(HrchError, RuntimeError):
    """An iterative root solve did not reach its tolerance."""


class ConfigError(HrchError, ValueError):
    """Invalid configuration; ``field`` names the offending dotted key."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ShapeError(HrchError, ValueError):
    """Array lengths or time grids do not match."""


class SeparationError(HrchError):
    """A run failed the separation check required by a strong-norm study."""


class IoError(HrchError, OSError):
    """Writing an output artifact failed."""
