"""Exception types raised across the package."""


class LadderLabError(Exception):
    """Base class."""


class DivergentIntegralError(LadderLabError):
    """An improper integral does not converge (tail not integrable)."""


class QuadratureError(LadderLabError):
    """Quadrature failed to reach tolerance.

    ``residual`` carries the error estimate reported by the integrator.
    """

    def __init__(self, msg, residual=float("nan")):
        super().__init__(msg)
        self.residual = residual


class TruncationError(LadderLabError):
    """An integrand on a truncated grid has not decayed at the boundary."""


class WindowTooNarrowError(TruncationError):
    """Boundary contributions of a t-window exceed the allowed fraction."""


class ZeroTailError(LadderLabError):
    """A tail function vanished where it must be strictly positive."""


class DomainError(LadderLabError, ValueError):
    """Argument outside the domain of a formula."""


class PreconditionError(LadderLabError, ValueError):
    """A documented precondition of an operation is not met."""


class InsufficientDataError(LadderLabError):
    """Too few Monte Carlo samples to form the requested statistic."""


class NonConvergenceError(LadderLabError):
    """A limit estimated along probes did not stabilise."""
