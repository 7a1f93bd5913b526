class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class InconsistentFeedbackError(RuntimeError):
    """Raised when a version space becomes empty.

    This only happens if the fairness oracle lied or a numerical tolerance
    was exceeded somewhere upstream.
    """
