"""Exception types shared across modules (the CLI maps them to exit codes)."""


class ResourceGuardError(ValueError):
    """An enumeration was requested beyond its feasibility guard."""


class VerificationError(RuntimeError):
    """A claimed identity or certificate failed to verify.

    ``details`` carries a machine-readable mismatch report.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class ConvergenceError(RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    ``trace`` holds the iteration history and ``best`` the best iterate seen.
    """

    def __init__(self, message, trace=None, best=None):
        super().__init__(message)
        self.trace = trace or []
        self.best = best
