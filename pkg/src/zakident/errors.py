"""Exception types shared across the package."""


class IdentError(Exception):
    """Base class for all identification errors."""


class StructuralError(IdentError, ValueError):
    """Inputs have mismatched shapes, parameters, or out-of-range indices."""


class InconsistencyError(IdentError, ValueError):
    """Data contradicts the declared support (energy outside it)."""


class PreconditionError(IdentError, ValueError):
    """An operation was called outside the regime where it is defined."""


class BudgetError(IdentError, RuntimeError):
    """Exhaustive enumeration would exceed the configured budget."""


class GenerationError(IdentError, RuntimeError):
    """Random generation failed to produce a valid object."""


class InfeasibleError(IdentError, RuntimeError):
    """No support up to the requested size explains the measurement."""
