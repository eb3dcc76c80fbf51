"""Exception hierarchy shared by every module."""


class HeraldixError(Exception):
    """Base class for all package errors."""


class DimensionError(HeraldixError, ValueError):
    """Mode counts or matrix shapes do not line up."""


class DegenerateStateError(HeraldixError, ValueError):
    """A state vector (or a denominator built from one) vanishes."""


class ConstraintError(HeraldixError, ValueError):
    """A normalization or unitarity constraint is violated."""


class ConfigurationError(HeraldixError, ValueError):
    """A scheme configuration is inconsistent with the requested operation."""


class DomainError(HeraldixError, ValueError):
    """An argument lies outside the domain an operation supports."""


class SingularConfigurationError(HeraldixError, ArithmeticError):
    """A closed-form solve hit a vanishing denominator."""


class NoCompletionError(HeraldixError, ValueError):
    """An active block cannot be embedded in a unitary of the requested size."""


class NotCorrectableError(HeraldixError, ValueError):
    """A heralding event has no feed-forward correction."""


class InfeasibleError(HeraldixError, RuntimeError):
    """No restart reached the residual tolerance."""

    def __init__(self, message, best_residual=float("inf"), best=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best = best


class PreconditionError(HeraldixError, ValueError):
    """The configuration does not actually prepare the requested target."""


class UnsupportedShapeError(HeraldixError, NotImplementedError):
    """Closed forms exist only for a narrower scheme shape."""


class TractabilityError(HeraldixError, ValueError):
    """The brute-force simulation would exceed its photon budget."""


class StructuralError(HeraldixError, ValueError):
    """Two projectors have different coefficient key sets."""
