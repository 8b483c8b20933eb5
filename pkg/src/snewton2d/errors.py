"""Exception hierarchy shared by all modules."""


class SNError(Exception):
    """Base class for every error raised by this package."""


class InvalidGrid(SNError, ValueError):
    pass


class GridMismatch(SNError, ValueError):
    pass


class BadExponent(SNError, ValueError):
    pass


class ZeroField(SNError, ValueError):
    pass


class GridTooLarge(SNError, ValueError):
    pass


class RegimeViolation(SNError, ValueError):
    """Parameters fall outside the hypotheses required by the requested mode."""


class NoNehariRoot(SNError, RuntimeError):
    """The amplitude fiber t -> I(tu) is increasing, so it never meets the Nehari set."""


class NoSignChange(SNError, RuntimeError):
    pass


class Unbounded(SNError, RuntimeError):
    pass


class ZeroInit(SNError, ValueError):
    pass


class Diverged(SNError, RuntimeError):
    pass


class NotConverged(SNError, ValueError):
    pass


class RegimeMismatch(SNError, ValueError):
    pass


class WindowEmpty(SNError, ValueError):
    pass


class CorruptField(SNError, ValueError):
    pass


class ConfigError(SNError, ValueError):
    pass
