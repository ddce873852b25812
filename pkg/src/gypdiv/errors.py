"""Exception hierarchy shared by every gypdiv module."""


class GypDivError(Exception):
    """Base class for all errors raised by gypdiv."""


class DomainError(GypDivError, ValueError):
    """An argument lies outside the domain of the operation."""


class GeneratorDefinitionError(DomainError):
    """A generator violates f(1) = 0, convexity, or its declared limits."""


class NotNormalizedError(DomainError):
    """A probability vector does not sum to one."""


class LengthMismatchError(DomainError):
    """The two probability vectors of a pair differ in length."""


class NegativeEntryError(DomainError):
    """A probability vector has a negative entry."""


class DefinitionError(DomainError):
    """A countable pair's partial sums exceed one."""


class AccuracyError(GypDivError):
    """A numerical routine could not reach the requested accuracy.

    ``best_estimate`` carries whatever the routine managed to compute, or
    ``None`` when nothing useful is available.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class InfiniteDivergenceError(GypDivError):
    """The divergence is infinite, so no finite epsilon-certificate exists."""


class SizeGuardError(GypDivError):
    """An exhaustive computation was requested on an input that is too large."""
