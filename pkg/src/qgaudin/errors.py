"""Exception hierarchy.

Every error raised on purpose by the package derives from ``QGaudinError``
so callers (and the CLI) can map families of failures to exit codes.
"""


class QGaudinError(Exception):
    pass


class DomainError(QGaudinError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigurationError(QGaudinError, ValueError):
    """Inconsistent system or run configuration."""


class DegenerateError(DomainError):
    """Measure-zero separatrix input (zero delta, zero Casimir, zero Omega)."""


class FitRangeError(DomainError):
    """Initial data falls outside the range of a kink (tanh) profile."""


class NumericalError(QGaudinError, ArithmeticError):
    pass


class StiffnessError(NumericalError):
    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow (h={h:.3e}) at t={t:.17g}")
        self.t = t
        self.h = h


class DivergenceError(NumericalError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state at t={t:.17g}")
        self.t = t


class AperiodicError(NumericalError):
    """No recurrence found in a trajectory."""
