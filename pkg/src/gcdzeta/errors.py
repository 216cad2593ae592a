"""Exception types shared across the package."""


class GcdZetaError(Exception):
    """Base class for all package errors."""


class DomainError(GcdZetaError, ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(GcdZetaError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class ResourceBudgetError(GcdZetaError, MemoryError):
    """The requested computation exceeds a configured size or time budget."""


class ConstructionError(GcdZetaError, ValueError):
    """The extremal-set construction is empty or ill-defined for these parameters."""


class ConvergenceError(GcdZetaError, RuntimeError):
    """An iterative method stopped before meeting its tolerance.

    The last iterate and the achieved accuracy are attached so callers can
    decide whether to use them anyway.
    """

    def __init__(self, message, last_iterate=None, achieved=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.achieved = achieved
