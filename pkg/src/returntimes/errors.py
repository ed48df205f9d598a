"""Exception types shared across the package."""


class ReturnTimesError(Exception):
    """Base class for all errors raised by this package."""


class BranchTruncationError(ReturnTimesError, ValueError):
    """A point falls below the last materialized branch of a countable family."""


class CriticalPointError(ReturnTimesError, ArithmeticError):
    """The derivative vanishes or is undefined at an orbit point."""


class BudgetExceeded(ReturnTimesError):
    """No return was observed within the iteration budget."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class PieceCapExceeded(ReturnTimesError):
    """An iterated interval union grew past the configured piece cap."""

    def __init__(self, message, step=None, pieces=None):
        super().__init__(message)
        self.step = step
        self.pieces = pieces


class ScanLimitExceeded(ReturnTimesError):
    """The searched prefix did not reoccur within the scan limit."""


class NoAdmissibleReturn(ReturnTimesError):
    """A Markov cylinder has no admissible return within the mixing bound."""


class HypothesisViolation(ReturnTimesError):
    """An estimator was asked for a quantity its limit theorem does not cover."""


class InsufficientData(ReturnTimesError, ValueError):
    """Too few usable rows or samples to form an estimate."""
