"""Exception hierarchy shared by the solvers and the CLI.

Each class carries the process exit status the CLI uses for it.
"""


class InfoPlanError(Exception):
    exit_code = 1


class ModelError(InfoPlanError, ValueError):
    """An invalid model: bad distribution, empty admissible set, bad argument."""

    exit_code = 2


class ResourceError(InfoPlanError):
    """A configured size cap (states, policy trees, steps) was exceeded."""

    exit_code = 3

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class NumericalError(InfoPlanError, ArithmeticError):
    """Factorization failure or a collapsed predictive variance."""

    exit_code = 4


class TargetNotReached(InfoPlanError):
    """An information target was not attained within the allowed stages."""

    exit_code = 5

    def __init__(self, message, best=None, stages=None):
        super().__init__(message)
        self.best = best
        self.stages = stages


class ConsistencyError(InfoPlanError, LookupError):
    """A solver invariant broke, e.g. a successor missing from the value table."""

    exit_code = 6
