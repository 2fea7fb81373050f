"""Exception hierarchy shared by all solver modules."""


class KineticError(Exception):
    """Base class for solver errors."""


class RangeError(KineticError, ValueError):
    """A value lies outside the declared validity range of a model."""


class DomainError(KineticError, ValueError):
    """A function is evaluated outside its mathematical domain."""


class NumericalError(KineticError, RuntimeError):
    """An iterative method failed to converge or a solve broke down."""


class ProjectionError(NumericalError):
    """The moment-matching Maxwellian could not be constructed on the grid."""


class DegenerateStateError(KineticError, ValueError):
    """A reduced state has non-positive density."""


class StepSizeError(KineticError, ValueError):
    """The requested time step violates the transport CFL limit."""


class ConfigError(KineticError, ValueError):
    """Invalid solver configuration; ``key`` holds the offending key path."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class ConvergenceError(KineticError, RuntimeError):
    """A steady-state run did not settle within its step budget."""
