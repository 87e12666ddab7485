"""Exception types shared across the package."""


class CatalogKGError(Exception):
    """Base class for all package errors."""


class SchemaError(CatalogKGError, KeyError):
    """An attribute is not part of the schema (or is used where it may not be)."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InputFormatError(CatalogKGError, ValueError):
    """A record in an input file could not be parsed.

    ``lineno`` is 1-based when known.
    """

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class SnapshotError(CatalogKGError, ValueError):
    """A saved graph or model file is corrupt, truncated or of an unknown version."""


class FingerprintMismatch(CatalogKGError, ValueError):
    """A model was trained against a different attribute schema."""
