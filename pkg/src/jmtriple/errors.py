"""Exception hierarchy.

Every error raised by the library derives from :class:`JmError`, which is a
``ValueError`` so that callers validating user input can catch it generically.
"""


class JmError(ValueError):
    """Base class for all library errors."""


class NonFinite(JmError):
    pass


class NormExceeded(JmError):
    pass


class PreconditionViolated(JmError):
    pass


class Degenerate(JmError):
    pass


class OutOfRange(JmError):
    pass


class NotCoplanar(JmError):
    pass


class NoProperIntersection(JmError):
    pass


class IllConditioned(JmError):
    pass


class PairCompatible(JmError):
    pass


class NotEnoughIncompatibility(JmError):
    pass


class NoClosedForm(JmError):
    """Raised when a target triple has no analytic optimum (generic geometry)."""


class NoFeasiblePoint(JmError):
    pass


class NoConvergence(JmError):
    """Iterative solver gave up.

    ``best`` holds the best iterate found so far (whatever result object the
    solver produces), so callers can still inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
