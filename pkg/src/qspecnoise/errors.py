"""Exception types raised across the package."""


class QSpecNoiseError(Exception):
    """Base class for all package errors."""


class ConfigError(QSpecNoiseError, ValueError):
    pass


class ZeroFieldError(QSpecNoiseError, ValueError):
    pass


class DimensionMismatch(QSpecNoiseError, ValueError):
    pass


class MissingReference(QSpecNoiseError, ValueError):
    pass


class StrengthOutOfRange(QSpecNoiseError, ValueError):
    pass


class QubitOutOfRange(QSpecNoiseError, IndexError):
    pass


class NoConvergence(QSpecNoiseError, RuntimeError):
    pass


class SingularConfusion(QSpecNoiseError, ValueError):
    pass


class TooFewSnapshots(QSpecNoiseError, ValueError):
    pass


class RankDeficient(QSpecNoiseError, ValueError):
    pass


class Unstable(QSpecNoiseError, RuntimeError):
    pass


class GridMismatch(QSpecNoiseError, ValueError):
    pass
