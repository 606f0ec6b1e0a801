"""Exception types shared across the package.

All domain errors derive from :class:`CdagError` (itself a ``ValueError``),
so callers, including the CLI, can distinguish bad inputs from bugs.
"""


class CdagError(ValueError):
    """Base class for all domain errors raised by this package."""


class GraphError(CdagError):
    """Invalid graph: cycles, self-loops, out-of-range vertices."""


class ColoringError(CdagError):
    """Invalid or unsuitable coloring (unknown class, incompatible, ...)."""


class NotPositiveDefiniteError(CdagError):
    """A covariance matrix that must be positive definite is not."""


class RankDeficientError(CdagError):
    """A least-squares design is rank deficient; fitting refuses silently
    degenerate models instead of pseudo-inverting."""

    def __init__(self, message, family=None):
        super().__init__(message)
        self.family = family


class SizeGuardError(CdagError):
    """An exhaustive computation was requested beyond its size guard."""


class SearchBudgetError(CdagError):
    """A greedy search exceeded its accepted-move budget."""
