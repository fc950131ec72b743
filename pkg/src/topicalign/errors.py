"""Exception types, one per CLI exit code class."""


class ConfigError(ValueError):
    """Invalid configuration or parameter choice (CLI exit code 2)."""


class DataError(ValueError):
    """Malformed or inconsistent input data (CLI exit code 3)."""


class NumericError(ValueError):
    """Numeric contract violation or failed computation (CLI exit code 4)."""
