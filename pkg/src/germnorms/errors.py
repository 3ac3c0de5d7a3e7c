"""Exception types shared across the package."""


class FormatError(ValueError):
    """Malformed input: files, expressions, or parameter strings."""


class ShapeError(ValueError):
    """Structurally incompatible objects: dimension, truncation, or payload mismatch."""
