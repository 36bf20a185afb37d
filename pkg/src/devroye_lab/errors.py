"""Exception types shared across the package."""


class DevroyeLabError(Exception):
    """Base class for package errors."""


class ParameterError(DevroyeLabError, ValueError):
    """Invalid map or experiment parameters."""


class DomainError(DevroyeLabError, ValueError):
    """Inputs outside an operation's domain (bad sizes, signs, ranges)."""


class InsufficientDataError(DevroyeLabError):
    """A series is too short and carries no tail model."""


class NonSummableError(DevroyeLabError):
    """A covariance series fails its summability diagnostic."""


class InsufficientScalesError(DevroyeLabError):
    """Fewer than two usable scales remain for a power-law fit."""


class CenteringError(DevroyeLabError):
    """An observable expected to be centered has a nonzero mean."""


class ValidationError(DevroyeLabError):
    """An output failed a finiteness or bound validation."""
