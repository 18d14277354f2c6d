"""Exception types raised across the package."""

from __future__ import annotations


class NCGError(Exception):
    """Base class for all library errors."""


class InvalidNetwork(NCGError, ValueError):
    pass


class InvalidStrategy(NCGError, ValueError):
    pass


class SpaceTooLarge(NCGError):
    """An exhaustive enumeration would exceed the configured budget."""


class NotSupported(NCGError):
    pass


class InfiniteRatio(NCGError, ArithmeticError):
    pass


class PreconditionNotMet(NCGError):
    pass


class OddDepth(NCGError, ValueError):
    pass


class ConstructionSearchFailed(NCGError):
    pass


class BudgetExhausted(NCGError):
    pass


class ScriptExhausted(NCGError):
    pass
