"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a documented precondition or invariant."""


class NumericalError(RuntimeError):
    """A computation ran but its result fails a numerical quality gate."""


class UnsupportedScaleError(ValidationError):
    """The request is structurally valid but outside the supported problem sizes."""
