"""
Exceptions raised by the sumsets package.

Everything derives from SumsetError so callers (the CLI, the pipeline) can
catch the whole family in one place and map it to an exit code.
"""

from typing import Any, Dict, List, Optional


class SumsetError(Exception):
    """Base class for every error raised by this package."""


class EmptySetError(SumsetError, ValueError):
    """A set was built from no elements."""


class ParseError(SumsetError, ValueError):
    """A set literal, set file or certificate could not be parsed."""


class SumsetOverflowError(SumsetError, OverflowError):
    """Element arithmetic left the int64 range."""

    def __init__(self, message: str, operands: Optional[List[Any]] = None):
        super().__init__(message)
        self.operands = operands or []


class BudgetExceeded(SumsetError):
    """A materialization needs more bits or elements than allowed."""

    def __init__(self, message: str, needed: int = 0, allowed: int = 0, h: Optional[int] = None):
        super().__init__(message)
        self.needed = needed
        self.allowed = allowed
        self.h = h


class PreconditionViolation(SumsetError, ValueError):
    """An operation was called outside its documented domain."""


class ValidityError(SumsetError):
    """A size law was asked for outside the range where it is proven."""


class StabilizationNotFound(SumsetError):
    """No eventual structure was detected below the search cap."""

    def __init__(self, message: str, profile: Optional[List[int]] = None):
        super().__init__(message)
        self.profile = profile or []


class StructureInvariantError(SumsetError):
    """A detected structure broke 0 <= delta <= N + 1; indicates a bug."""


class NoBasePair(SumsetError):
    """The exhaustive base-pair search found no witness."""


class SearchExhausted(SumsetError):
    """No sign flip was found below the scan cap."""


class InvalidState(SumsetError):
    """A race state breaks one of its invariants."""


class Inconclusive(SumsetError):
    """Neither brute force nor a validated size law could settle a size."""


class ConstructionFailed(SumsetError):
    """Race construction stopped early; carries the partial certificate."""

    def __init__(self, message: str, partial: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.partial = partial
