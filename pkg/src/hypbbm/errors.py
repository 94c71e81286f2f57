"""Exception types shared across the package."""


class DomainError(ValueError):
    """A coordinate or parameter lies outside the domain of the map."""


class ConfigError(ValueError):
    """A simulation or estimator configuration is inconsistent."""


class DegenerateInputError(ValueError):
    """Input data carries no usable signal for the requested estimate."""


class InsufficientDataError(RuntimeError):
    """Not enough data points or scales to run the requested fit."""


class ConditioningError(RuntimeError):
    """A conditional sampling loop failed to accept within its budget."""


class UnknownParticleError(KeyError):
    """A particle id is not present in the snapshot."""
