"""Exception and warning types shared across the package."""


class RingSpinError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(RingSpinError, ValueError):
    """A physical or numerical parameter is outside its allowed range."""


class InvalidLabelError(RingSpinError, ValueError):
    """A fermion label violates its mode constraints."""


class FrameMismatchError(RingSpinError, ValueError):
    """Objects living in different frames (Lab vs Rotated) were combined."""


class ContractViolationError(RingSpinError, ValueError):
    """An operation was called on an object that does not satisfy its precondition."""


class NumericalError(RingSpinError, RuntimeError):
    """A numerical routine failed (diagonalization, integration)."""


class DiagonalizationError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class IntegrationError(NumericalError):
    """Time propagation failed or violated its norm bound."""


class StiffScheduleError(IntegrationError):
    """The adaptive integrator could not advance (step size underflow)."""


class DegeneratePerturbationError(NumericalError):
    """A perturbative energy denominator vanishes."""


class UndefinedCorrelationError(RingSpinError, ValueError):
    """g2 requested for a state with zero excitation density."""


class ForbiddenTransitionError(RingSpinError, ValueError):
    """The drive has a vanishing matrix element between the requested states."""


class UnsupportedTargetError(RingSpinError, ValueError):
    """The excitation protocol does not cover the requested target."""


class RegimeWarning(UserWarning):
    """Parameters violate an ordering (e.g. delta_osc << beta << omega) the physics relies on."""


class LifetimeWarning(UserWarning):
    """Total schedule duration exceeds the Rydberg-lifetime budget."""


class SymmetryWarning(UserWarning):
    """A quantity assuming a fully-symmetric state was evaluated on a non-symmetric one."""
