"""Exception types raised by the numerical routines."""


class QuadratureError(RuntimeError):
    """Refinement did not converge.

    ``estimates`` holds the last two refinement values so callers can judge
    how far apart they were.
    """

    def __init__(self, message, estimates=(None, None)):
        super().__init__(message)
        self.estimates = tuple(estimates)


class InputDomainError(ValueError):
    """An integrand returned NaN on the quadrature support."""


class InadmissibleMeasureError(ValueError):
    """The measure does not define a Toeplitz operator (divergent weighted mass)."""


class ResourceError(RuntimeError):
    """A requested computation exceeds a configured size cap."""


class AssemblyError(RuntimeError):
    pass


class SpectralError(RuntimeError):
    pass
