"""Exception types shared across the library."""


class ChristoffelLabError(Exception):
    """Base class for all library errors."""


class PotentialRangeError(ChristoffelLabError):
    """Evaluation outside the range a tabulated potential covers."""


class IntegrationFailure(ChristoffelLabError):
    """ODE integration could not reach the target position.

    Carries the position where the integrator gave up.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at x = {position:.6g})")
        self.position = position


class GapSolveError(ChristoffelLabError):
    """Critical-point solve did not converge; carries the residual vector."""

    def __init__(self, message, residuals):
        super().__init__(f"{message} (residuals {residuals})")
        self.residuals = residuals


class BandDomainError(ChristoffelLabError):
    """A band-interior quantity was requested in a gap or at a band edge."""


class WeylConvergenceError(ChristoffelLabError):
    """Weyl disks stopped shrinking before the requested radius was reached."""

    def __init__(self, message, achieved_radius):
        super().__init__(f"{message} (achieved radius {achieved_radius:.3e})")
        self.achieved_radius = achieved_radius


class ConfigError(ChristoffelLabError):
    """Invalid experiment configuration; message names the offending field."""
