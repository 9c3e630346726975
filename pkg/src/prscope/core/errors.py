"""Error taxonomy shared by all prscope modules."""


class PrscopeError(Exception):
    """Base class for every error raised on purpose by prscope."""


class DimensionError(PrscopeError, ValueError):
    """Operands disagree on a length or a qubit count."""


class DomainError(PrscopeError, ValueError):
    """A parameter lies outside the range an operation is defined on."""


class StructuralError(DomainError):
    """A circuit violates its own layering rules."""


class ResourceError(PrscopeError, MemoryError):
    """A dense object would exceed the configured size caps."""
