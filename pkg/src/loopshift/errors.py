"""Exception types shared across the package."""


class LoopShiftError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(LoopShiftError, ValueError):
    """A value violates an operation's precondition."""


class ImproperShiftError(LoopShiftError):
    """Loop shifting produced an improper transfer function.

    Signals that the controller shape is outside what the shifted feedback
    form supports (leading coefficients cancelled in the new denominator).
    """


class UnstableSystemError(LoopShiftError):
    """An H-infinity norm was requested for a system that is not stable."""


class UnsupportedPresetError(LoopShiftError, ValueError):
    """No parameter preset is defined for the requested method family."""


class UnsupportedFactorizationError(LoopShiftError, ValueError):
    """The method family has no integrator/lag factorization."""


class NoCertificateError(LoopShiftError):
    """No convergence rate below one is certifiable for the configuration."""


class InsufficientDataError(LoopShiftError, ValueError):
    """Too few usable residuals to fit a convergence rate."""
