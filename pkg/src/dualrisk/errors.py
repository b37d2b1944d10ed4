"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid model parameters or out-of-range arguments."""


class NumericalError(ArithmeticError):
    """A computation could not be completed reliably (singular system, residual breach, ...)."""


class RepresentationError(NumericalError):
    """A result left the exponential-polynomial family (pole collision, complex residue, ...)."""
