"""Exceptions shared across modules."""


class ResourceError(RuntimeError):
    """A configured cap (states, ranks, time) was exceeded.

    Raised instead of returning a verdict that might be wrong.
    """

    def __init__(self, message: str, limit=None):
        super().__init__(message)
        self.limit = limit
