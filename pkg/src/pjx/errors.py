"""Exception hierarchy.

Every error raised by the package derives from :class:`PJXError`. The three
intermediate classes map onto CLI exit codes: domain problems (bad input),
range problems (request outside what the theory or numerics cover) and
numerical failures.
"""


class PJXError(Exception):
    """Base class."""


class DomainError(PJXError, ValueError):
    """Input violates a precondition (exit code 2)."""


class RangeError(PJXError):
    """Request lies outside the covered parameter range (exit code 3)."""


class NumericalError(PJXError, ArithmeticError):
    """A numerical procedure failed to meet its contract (exit code 4)."""


class ParameterError(DomainError):
    pass


class FitError(DomainError):
    pass


class ConsistencyError(DomainError):
    pass


class DivergenceError(DomainError):
    """Integral diverges for the requested arguments."""


class CFLError(DomainError):
    pass


class SingularityGuardError(RangeError):
    """Evaluation closer to the blow-up point than the quadrature guard allows."""


class OutOfRangeError(RangeError):
    pass


class UnsupportedRegimeError(RangeError):
    pass


class ExcludedParameterError(RangeError):
    """Parameter lies on an excluded resonance line."""


class ConvergenceError(NumericalError):
    pass


class NonFiniteIntegrandError(NumericalError):
    pass


class DepthExhaustedError(NumericalError):
    """Adaptive bisection hit its depth limit; carries the best estimate."""

    def __init__(self, msg, value=float("nan"), error=float("inf"), stuck=()):
        super().__init__(msg)
        self.value = value
        self.error = error
        self.stuck = tuple(stuck)


class BlowupGuardError(NumericalError):
    pass
