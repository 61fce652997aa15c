"""Exception hierarchy shared across the package.

Every error carries a short machine-readable category so the CLI can emit
single-line ``error: <category>: <detail>`` messages.
"""


class PDMarketError(Exception):
    category = "error"


class DomainError(PDMarketError):
    """Parameter outside its admissible domain."""

    category = "domain"


class DataError(PDMarketError):
    """Unusable or inconsistent input data."""

    category = "data"


class ConfigError(PDMarketError):
    """Invalid configuration (truncation rules, step sizes, sizes)."""

    category = "config"


class StateError(PDMarketError):
    """Operation applied to a state that cannot support it."""

    category = "state"
