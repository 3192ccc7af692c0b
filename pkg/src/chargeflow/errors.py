"""Exception hierarchy shared by all chargeflow modules."""


class ChargeflowError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ChargeflowError, ValueError):
    """A probe point or region falls outside the computational box."""


class AccuracyError(ChargeflowError):
    """A numerical precondition (boundary decay, residual density, ...) is violated."""


class ConvergenceError(ChargeflowError):
    """An iterative or extrapolated result failed its convergence test."""


class RangeError(ChargeflowError, ValueError):
    """Argument outside the supported range of a special function."""
