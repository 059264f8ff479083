"""Exception hierarchy shared by every hktunnel module."""


class HKError(Exception):
    """Base class for all errors raised by hktunnel."""


class AiryRangeError(HKError, ValueError):
    """Argument outside the range where the Airy evaluator is validated."""


class QuadratureError(HKError, ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within the evaluation budget.

    Attributes
    ----------
    estimate : complex
        Best available value of the integral.
    error : float
        Error estimate attached to `estimate`.
    nevals : int
        Number of integrand evaluations spent.
    """

    def __init__(self, message, estimate=None, error=None, nevals=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.nevals = nevals


class NoConvergenceError(HKError, ArithmeticError):
    """Newton iteration failed to converge."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class CausticError(HKError, ValueError):
    """Evaluation requested inside a caustic band where the asymptotic formula diverges."""


class BranchCutError(HKError, ValueError):
    """Square-root prefactor evaluated on (or degenerate at) its branch cut."""


class DivergenceError(HKError, ArithmeticError):
    """Trajectory state became non-finite.

    Attributes
    ----------
    time : float
        Time at which the state first left the finite range.
    index : int or None
        Flat index of the first offending initial condition, if a batch was integrated.
    """

    def __init__(self, message, time=None, index=None):
        super().__init__(message)
        self.time = time
        self.index = index


class DomainTooSmallError(HKError, ValueError):
    """Wavefunction amplitude leaked into the edge margin of the propagation grid."""
