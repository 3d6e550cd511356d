"""Exception types shared across the package."""


class CavitasError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CavitasError, ValueError):
    """Invalid physical or numerical configuration (bad atom count, step size, dimensions)."""


class DomainError(CavitasError, ValueError):
    """Argument outside its admissible range (projection index, atom count limit, ...)."""


class TruncationError(ConfigurationError):
    """Fock cutoff too small for the requested state or run."""


class IntegrationError(CavitasError, RuntimeError):
    """Propagation left its validity envelope (norm drift, positivity, trace)."""
