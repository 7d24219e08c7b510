"""Exception types shared across the engine."""


class DucgError(Exception):
    """Base class for all engine errors."""


class ModelFormatError(DucgError):
    """A model or corpus file violates the expected schema.

    ``path`` points at the offending field, e.g. ``links[2].a[0].k``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnknownReferenceError(ModelFormatError):
    """A link, gate, disease or scaler references an undeclared variable."""


class VersionMismatchError(ModelFormatError):
    """The file's format_version is not supported."""


class FusionConflictError(DucgError):
    """Two modules disagree on a shared variable or declare the same disease."""


class GateExpressionError(DucgError):
    """A logic-gate row expression cannot be parsed or evaluated."""


class PreconditionError(DucgError):
    """An operation was called outside its contract (e.g. unknown hypothesis)."""


class EnumerationSizeError(DucgError):
    """The model exceeds the exhaustive-enumeration size guard."""


class EvidenceError(DucgError):
    """An observation references an unknown variable or an invalid state."""
