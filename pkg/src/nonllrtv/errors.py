"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter value, malformed file, or inconsistent configuration."""


class NumericalError(RuntimeError):
    """A numerical routine failed or the solver produced non-finite values."""
