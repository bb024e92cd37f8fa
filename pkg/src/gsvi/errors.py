"""Exception hierarchy shared by every gsvi module."""


class GSVIError(Exception):
    """Base class for all gsvi errors."""


class DomainError(GSVIError, ValueError):
    """An argument lies outside the domain of a formula (t <= 0, w <= 0, ...)."""


class ParameterError(GSVIError, ValueError):
    """A family parameter is outside its admissible range."""


class KnotError(GSVIError, ValueError):
    """A derivative was requested exactly at a knot of Psi without choosing a side."""


class ConfigError(GSVIError, ValueError):
    """Malformed or unknown surface configuration."""


class ArbitrageError(GSVIError):
    """The requested quantity does not exist because the slice admits arbitrage."""


class TailError(GSVIError):
    """A tail integral failed to converge on the working domain."""


class PreconditionError(GSVIError):
    """A documented precondition of a check is not met."""
