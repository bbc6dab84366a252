"""Exception taxonomy shared by all workbench modules."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class InvalidParameterError(WorkbenchError, ValueError):
    """An argument violates a hard precondition (range, shape, model)."""


class DomainError(WorkbenchError, ValueError):
    """Inputs are outside the mathematical domain of the operation."""


class ResourceLimitError(WorkbenchError, RuntimeError):
    """A brute-force enumeration would exceed its configured cap."""


class DegreeBudgetError(WorkbenchError, ValueError):
    """A polynomial or monomial exceeds the degree budget d."""


class DegenerateNormalizationError(WorkbenchError, ArithmeticError):
    """Normalization is impossible because the mass evaluates to zero."""


class NumericOverflowError(WorkbenchError, OverflowError):
    """Conversion of exact rationals to floating point left finite range."""


class ConfigError(WorkbenchError, ValueError):
    """A run configuration is malformed or contains unknown fields."""
