"""Exception hierarchy shared by all modules."""


class NHPoissonError(Exception):
    """Base class for library errors."""


class ContractError(NHPoissonError, ValueError):
    """An argument violates an operation's precondition (shape, sign, ...)."""


class DomainError(NHPoissonError, ValueError):
    """A field was evaluated outside its declared domain."""


class ConfigError(NHPoissonError, ValueError):
    """Invalid system parameters or run configuration."""


class UnsupportedVariantError(ConfigError):
    """The requested system/variant combination does not exist."""


class ConvergenceError(NHPoissonError, RuntimeError):
    """An adaptive integrator could not meet its tolerance."""
