"""Exception hierarchy for the item fairness toolkit.

Each error type maps to one CLI exit code (see the ``EXIT_*`` constants in ``cli``).
"""

from typing import Optional


class ItemFairError(Exception):
    """Base class for all toolkit errors."""


class RunValidationError(ItemFairError, ValueError):
    """A run, qrels or auxiliary file violates its format or invariants.

    Args:
        message: Description of the violated invariant
        source: File name, or "<memory>" for in-memory objects
        line: 1-based line number when known
    """

    def __init__(self, message: str, source: str = "<memory>", line: Optional[int] = None):
        self.message = message
        self.source = source
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.source}:{self.line}: {self.message}"
        return f"{self.source}: {self.message}"


class NormalizationDegenerate(ItemFairError, ArithmeticError):
    """Min-max normalisation with x_max equal to x_min (e.g. k = n)."""


class SpaceTooLarge(ItemFairError):
    """Brute-force search space exceeds the configured cap."""


class NoSimilarPairs(ItemFairError):
    """VoCD requested but no pair of recommended items is alpha-similar."""


class PoolExhausted(ItemFairError):
    """A user has fewer than k recommendable items in nonrepeatable mode."""
