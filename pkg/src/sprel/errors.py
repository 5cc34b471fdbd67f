"""Exception types shared across the toolkit."""


class SprelError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SprelError):
    """An input file could not be parsed (malformed JSON, bad record)."""


class SchemaError(SprelError):
    """An input parsed but violates the expected schema or invariants."""


class ValidationError(SprelError):
    """Inputs are individually well-formed but mutually inconsistent."""


class NotEnoughObjects(SprelError):
    """An image does not contain enough eligible objects to sample from."""
