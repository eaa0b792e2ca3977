"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration is missing, malformed, or inconsistent."""


class DataError(ValueError):
    """A dataset or artifact file could not be loaded or does not match."""


class CapacityError(RuntimeError):
    """A requested simulation exceeds the configured qubit budget."""


class DegenerateDataError(ValueError):
    """Training data admits no binary separation (e.g. a single class)."""
