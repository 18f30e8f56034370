"""Exception hierarchy shared by the engine modules."""


class RRMCError(Exception):
    """Base class for all engine errors."""


class ConfigError(RRMCError, ValueError):
    """Invalid or inconsistent configuration (grids, products, experiment files)."""


class NumericalError(RRMCError, ArithmeticError):
    """A numerical routine could not produce a finite, well-defined result."""


class FactorizationError(NumericalError):
    """Cholesky factorization of a correlation matrix failed."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SimulationError(NumericalError):
    """A simulated state was non-finite."""

    def __init__(self, message, path=None, date=None):
        super().__init__(message)
        self.path = path
        self.date = date


class UnderdeterminedError(NumericalError):
    """Least squares problem with fewer rows than columns."""


class CollinearityError(NumericalError):
    """Strict-mode regression found a (numerically) dependent design column."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class CapacityError(RRMCError, MemoryError):
    """Requested workspace exceeds the configured memory cap."""


class ConvergenceError(NumericalError):
    """An iterative oracle failed to converge; carries the last two iterates."""

    def __init__(self, message, iterates=()):
        super().__init__(message)
        self.iterates = tuple(iterates)
