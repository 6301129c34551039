"""Exception hierarchy shared by all modules."""


class EprTrajectoryError(Exception):
    """Base class for all package errors."""


class InvalidArgument(EprTrajectoryError, ValueError):
    pass


class NumericalFailure(EprTrajectoryError, ArithmeticError):
    pass


class StepSizeError(NumericalFailure):
    """Raised when a fixed-step integrator leaves the physical state space."""


class InfeasibleTarget(EprTrajectoryError, ValueError):
    """Raised when no entangling strength reaches the requested EPR variance."""


class ConfigError(EprTrajectoryError, ValueError):
    pass
