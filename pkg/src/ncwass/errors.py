"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`NCWassError`, which is a
``ValueError`` so that plain validation failures can be caught generically.
"""

from __future__ import annotations


class NCWassError(ValueError):
    """Base class for all toolkit errors."""


class ValidationError(NCWassError):
    """Malformed input. ``pointer`` is a JSON pointer into the offending payload."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class DimensionMismatch(NCWassError):
    pass


class MixedDimensions(NCWassError):
    pass


class NonUnitaryFrame(NCWassError):
    pass


class BadPartition(NCWassError):
    pass


class BadMergeMap(NCWassError):
    pass


class NonMaximalContext(NCWassError):
    pass


class UnsupportedVariant(NCWassError):
    pass


class BadMetric(NCWassError):
    """Metric matrix failed validation; ``witness`` is the offending index triple or pair."""

    def __init__(self, message: str, witness: tuple[int, ...] | None = None):
        super().__init__(message)
        self.witness = witness


class MetricViolation(NCWassError):
    """A computed point metric violated the triangle inequality."""

    def __init__(self, message: str, witness: tuple[int, ...] | None = None):
        super().__init__(message)
        self.witness = witness


class ArityMismatch(NCWassError):
    pass


class BadExponent(NCWassError):
    pass


class MarginalMismatch(NCWassError):
    pass


class NumericalFailure(NCWassError):
    pass


class UnboundedObjective(NCWassError):
    """The objective does not vanish on a direction the constraints leave free."""

    def __init__(self, message: str, direction=None):
        super().__init__(message)
        self.direction = direction


class CutLimitExceeded(NCWassError):
    """Raised only in strict mode; ``result`` carries the uncertified bounds."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class SearchBudgetExceeded(NCWassError):
    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result
