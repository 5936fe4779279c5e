"""Exception types shared across the solver."""


class DimensionError(ValueError):
    """Operand shapes are inconsistent with the declared problem dimensions."""


class EigenError(RuntimeError):
    """The symmetric eigenvalue routine failed to converge."""


class ConfigurationError(ValueError):
    """Solver or problem configuration is unusable (e.g. missing Hessian oracle)."""


class SubproblemError(RuntimeError):
    """Subproblem Newton iteration exhausted its budget above tolerance.

    Carries the best iterate found in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class LineSearchError(RuntimeError):
    """Armijo backtracking exceeded the maximum exponent.

    ``samples`` holds the (ell, step, merit value) triples that were probed.
    """

    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples or []


class SolveAborted(RuntimeError):
    """Outer iteration aborted; ``report`` holds the partial solve report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
