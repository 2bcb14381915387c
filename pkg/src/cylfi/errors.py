"""Exception hierarchy shared by every module."""


class CylfiError(Exception):
    """Base class for all errors raised by the package."""


class ShapeError(CylfiError, ValueError):
    pass


class DomainError(CylfiError, ValueError):
    pass


class TruncationError(CylfiError):
    """A degree exceeded the configured truncation of a formal series."""


class ResourceError(CylfiError):
    pass


class SingularityError(CylfiError):
    pass


class NumericalDegeneracyError(CylfiError):
    pass


class InsufficientDataError(CylfiError, ValueError):
    pass


class ExtrapolationError(CylfiError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(CylfiError):
    """Carries the diagnostics dict of the failed limit study."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class QuadratureError(CylfiError):
    pass


class ParseError(CylfiError, ValueError):
    def __init__(self, message, text="", position=0):
        super().__init__(message)
        self.text = text
        self.position = position

    def caret(self):
        return f"{self.text}\n{' ' * self.position}^"
