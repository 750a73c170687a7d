"""Exception hierarchy.

Every error raised by the package derives from :class:`SistError`, so callers
(and the CLI) can catch one type. Subclasses also derive from the matching
builtin where one fits, e.g. ``RaggedLengths`` is a ``ValueError``.
"""


class SistError(Exception):
    """Base class for all package errors."""


# dataset
class EmptyInput(SistError, ValueError):
    pass


class RaggedLengths(SistError, ValueError):
    pass


class NonNumericValue(SistError, ValueError):
    pass


class NonFiniteValue(SistError, ValueError):
    pass


class NotBinary(SistError, ValueError):
    pass


class TooFewPerClass(SistError, ValueError):
    pass


# distance
class LengthMismatch(SistError, ValueError):
    pass


class ShapeletLongerThanSeries(SistError, ValueError):
    pass


class PlacementOutOfRange(SistError, ValueError):
    pass


# selection / transform
class LengthTooLarge(SistError, ValueError):
    pass


class EmptyClass(SistError, ValueError):
    pass


class MetricPlacementMismatch(SistError, ValueError):
    pass


class InvalidCutPoints(SistError, ValueError):
    pass


# classifier
class SingleClass(SistError, ValueError):
    pass


class DimensionMismatch(SistError, ValueError):
    pass


# pipeline
class CandidateStarvation(SistError, RuntimeError):
    pass


class UnknownClass(SistError, ValueError):
    pass


class SchemaVersionMismatch(SistError, ValueError):
    pass


class CorruptModel(SistError, ValueError):
    pass


# oracle
class CandidateBudgetExceeded(SistError, RuntimeError):
    pass
