class ValidationError(ValueError):
    """Bad input: wrong shape, missing parameter, out-of-range value."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or returned an unusable result."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail
