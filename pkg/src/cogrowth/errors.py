"""Exception hierarchy shared by all cogrowth modules."""


class CogrowthError(Exception):
    """Base class for every error raised by this package."""


class BudgetExceeded(CogrowthError):
    """A configured size or work budget was exhausted."""


class PartialBallError(BudgetExceeded):
    """Ball construction ran out of budget.

    ``completed_radius`` is the largest radius whose sphere was fully built.
    """

    def __init__(self, message, completed_radius):
        super().__init__(message)
        self.completed_radius = completed_radius


class InsufficientRadius(CogrowthError):
    """A ball is too small to support the requested exact count."""


class UnsupportedPresentation(CogrowthError):
    """The requested oracle is not sound for this presentation."""


class UndefinedEstimate(CogrowthError):
    """No nonzero counts to extract an exponent from."""


class DomainError(CogrowthError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class NoSolution(DomainError):
    """Inverse formula has no solution on the admissible branch."""


class HypothesisNotMet(CogrowthError):
    """The locality certificate's scale hypothesis (A >= B) fails."""


class IncompleteWindow(CogrowthError):
    """A count table does not cover the certification window."""


class CoverageError(CogrowthError):
    """Inflated lengths exceed the count table's exact range."""


class CorruptTable(CogrowthError, ValueError):
    """A count table violates superadditivity."""


class MalformedDiagram(CogrowthError, ValueError):
    """A diagram violates the structural map invariants."""


class SearchBudgetExceeded(BudgetExceeded):
    """Diagram search stopped before deciding; the result is indeterminate."""
