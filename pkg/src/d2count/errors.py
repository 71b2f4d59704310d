class D2CountError(Exception):
    """Base class for library errors."""


class PreconditionError(D2CountError, ValueError):
    """Input violates an operation's precondition."""


class FeasibilityError(D2CountError, RuntimeError):
    """Requested accuracy needs more work than the configured budget allows."""
