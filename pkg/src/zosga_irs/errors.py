"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the domain an operation accepts."""


class DimensionError(ValueError):
    """Array shapes passed to an operation are inconsistent."""


class ConfigError(ValueError):
    """A scenario file or configuration value is malformed."""
