"""Exception types shared across the package."""


class OrdtrialError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(OrdtrialError, ValueError):
    """An argument is outside its documented domain."""


class UndefinedValueError(OrdtrialError, ValueError):
    """The requested quantity is undefined for the given data."""


class DegenerateInputError(OrdtrialError, ValueError):
    """Data too degenerate for the test to be defined (e.g. a single category)."""


class DatasetFormatError(OrdtrialError, ValueError):
    """A dataset file violates the expected layout."""


class ConfigError(OrdtrialError, ValueError):
    """A scenario configuration is malformed or contains unknown keys."""
