"""Exception types shared across the package."""


class DomainError(ValueError):
    """Parameters lie outside the range where an operation is defined."""


class UsageError(ValueError):
    """Malformed call: wrong argument shape, missing input, bad file."""


class VerificationError(AssertionError):
    """A checked mathematical statement was refuted.

    ``counterexample`` carries whatever object witnesses the failure.
    """

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class InconsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""
