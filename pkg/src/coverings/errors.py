class CoveringError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(CoveringError, ValueError):
    """Invalid (v, k, t) or other construction parameters."""


class BudgetError(CoveringError):
    """A requested computation exceeds a configured size budget."""


class DesignFormatError(CoveringError, ValueError):
    """Malformed design file."""
