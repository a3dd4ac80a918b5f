"""Exception types shared across the package."""


class BoundcertError(Exception):
    """Base class for all failures raised by this package."""


class ConfigError(BoundcertError):
    """Invalid run configuration (bad tolerance, empty schedule, ...)."""


class DivergentNorm(BoundcertError):
    """A potential-norm quadrature failed to converge under its budget."""


class NoMinimizer(BoundcertError):
    """The ball problem has an interior zero-energy node, no minimizer exists."""


class IllConditioned(BoundcertError):
    """Grid refinement moved the answer beyond the declared tolerance."""


class StepperFailure(BoundcertError):
    """Adaptive ODE integration failed (step-size underflow or similar)."""


class Inconsistent(BoundcertError):
    """The two independent scattering-length routes disagree."""


class NotConverged(BoundcertError):
    """A two-grid error estimate exceeded its acceptance threshold."""


class NotCertifiable(BoundcertError):
    """No certificate can exist for this input (nonnegative scattering length)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SearchExhausted(BoundcertError):
    """The certificate search ran out of schedule without a negative bound."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InconsistentB(BoundcertError):
    """The pair-kernel integral failed to reproduce the constant b."""


class DegenerateSample(BoundcertError):
    """Monte Carlo sampling kept producing underflowing orbital values."""
