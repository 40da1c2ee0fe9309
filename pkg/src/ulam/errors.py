"""Exception hierarchy shared by every module."""


class UlamError(Exception):
    """Base class for all errors raised by this package."""


class CapacityError(UlamError, OverflowError):
    """An exact integer left the supported 128-bit range (or q exceeded the cap)."""


class ShapeError(UlamError, ValueError):
    """Vectors with mismatched lie budgets were combined."""


class LegalityError(UlamError, ValueError):
    """A question vector is not legal for the state it is asked at."""


class BudgetExceeded(UlamError):
    """The exact solver refused an instance because it ran past its question budget."""


class DomainError(UlamError, ValueError):
    """An operation was called outside the parameter range where it is defined."""


class StrategyInapplicable(UlamError):
    """A constructive move rule produced a non-integral or illegal question."""


class FormatError(UlamError, ValueError):
    """A serialized vector, memo file or certificate could not be parsed."""


class VerificationError(UlamError):
    """A policy emitted an illegal move during exhaustive replay."""
