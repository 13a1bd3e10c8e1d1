"""Exception hierarchy shared by every module in the package."""


class EvidenceError(Exception):
    """Base class for all errors raised by evtherm."""


class DomainError(EvidenceError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class InfiniteInformationError(DomainError):
    """Fisher information (or its closed-form approximation) is infinite."""


class ConvergenceError(EvidenceError, RuntimeError):
    """An iterative method stopped before meeting its tolerance.

    The best available estimate is attached as ``best_estimate``.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class SolverError(EvidenceError, RuntimeError):
    """A root finder could not bracket or isolate a solution."""

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class NoSolutionError(SolverError):
    """The requested evidence level is below the minimum attainable value."""

    def __init__(self, message, e_min=None, scan=None):
        super().__init__(message, scan=scan)
        self.e_min = e_min


class TargetRangeError(SolverError, ValueError):
    """A target value lies beyond the range reachable on the chosen branch."""


class InfeasibleTargetError(SolverError, ValueError):
    """A target pair would force a negative evidential entropy."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node
