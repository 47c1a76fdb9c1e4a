"""Exception and warning types shared across the package."""


class TvaraugError(Exception):
    """Base class for all package-specific errors."""


# dataset ingestion

class MissingColumn(TvaraugError):
    pass


class NonNumericValue(TvaraugError):
    pass


class DuplicateTimestamp(TvaraugError):
    pass


class EmptyUnit(TvaraugError):
    pass


class DegenerateLength(TvaraugError):
    pass


# interpolation functions

class OutOfRange(TvaraugError):
    pass


class InvalidOrder(TvaraugError):
    pass


# process model

class NegativeRadicand(TvaraugError):
    """The noise-weight radicand went negative, the rate configuration is invalid."""


class ZeroInterpValue(TvaraugError):
    """An interpolation curve evaluates to zero where a nonzero value is required."""


class NonFiniteStats(TvaraugError):
    pass


class DegenerateCovariance(UserWarning):
    """A channel's empirical variance is identically zero, generation will be deterministic."""


# model persistence

class SchemaVersionMismatch(TvaraugError):
    pass


class CorruptModel(TvaraugError):
    pass


# validation

class ShapeMismatch(TvaraugError):
    pass


class LengthMismatch(TvaraugError):
    pass


# configuration

class ConfigError(TvaraugError):
    pass
