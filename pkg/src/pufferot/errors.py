"""Exception types shared across the library."""


class ValidationError(ValueError):
    """Invalid construction input or violated operation precondition."""


class NumericError(RuntimeError):
    """A numeric routine failed to converge or could not bracket a root."""
