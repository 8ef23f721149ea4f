"""Exception and warning types raised across the package."""


class TiercacheError(Exception):
    """Base class for every error raised by tiercache."""


class DomainError(TiercacheError, ValueError):
    """An argument lies outside the domain of the requested function."""


class PoleError(DomainError):
    """A function was evaluated at one of its poles."""


class NonConvergenceError(TiercacheError, RuntimeError):
    """An iterative method stopped before reaching its tolerance."""


class ConfigError(TiercacheError, ValueError):
    """A configuration value is missing, malformed or inconsistent."""


class InfeasiblePlacementError(DomainError):
    """A placement vector violates the box or capacity constraints."""


class DegenerateInputWarning(UserWarning):
    """Input sits on a singular point; a limiting value was returned."""


class ClampWarning(UserWarning):
    """A computed probability drifted outside [0, 1] and was clamped."""
