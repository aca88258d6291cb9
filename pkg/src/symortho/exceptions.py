"""Exception types shared across the package."""


class SymorthoError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(SymorthoError, ValueError):
    """Dimension or mode-index mismatch."""


class FieldError(SymorthoError, TypeError):
    """Real/complex field mismatch, or an operation unsupported over the field."""


class InfeasibleError(SymorthoError, ValueError):
    """The requested constraint class is empty for the given shape."""


class UnsupportedShapeError(SymorthoError, ValueError):
    """The certified oracle does not cover this problem shape."""


class BudgetError(SymorthoError, RuntimeError):
    """An iteration budget was exhausted before reaching the requested tolerance."""
