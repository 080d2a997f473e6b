"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical or numerical parameter violates its admissible domain."""


class SolverError(RuntimeError):
    """An iteration failed in a way that cannot be reported as a result."""


class ShootBlowupError(SolverError):
    """The shooting trajectory diverged before reaching the outer radius."""

    def __init__(self, radius, message=None):
        self.radius = float(radius)
        super().__init__(message or f"trajectory blew up at r = {self.radius:.6g}")
