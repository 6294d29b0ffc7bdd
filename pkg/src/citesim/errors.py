"""Shared exception types."""


class ConfigError(ValueError):
    """A parameter or parameter combination is outside its allowed range."""


class DataError(ValueError):
    """An input file or identifier could not be interpreted."""
