"""Shared exception types."""


class ShapeError(ValueError):
    """Operands have incompatible or unexpected shapes."""


class FormatError(ValueError):
    """A file (model container, vocabulary, rules, table) is malformed."""
