"""Exception types raised by the solvers.

All errors derive from :class:`IrsSecrecyError` so callers (in particular the
batch runner) can catch solver failures without masking programming errors.
"""


class IrsSecrecyError(Exception):
    """Base class for all library-specific failures."""


class NotPositiveDefinite(IrsSecrecyError):
    """A matrix expected to be positive definite failed its factorization."""


class RankTooHigh(IrsSecrecyError):
    """A matrix expected to be rank <= 1 has a significant second singular value."""


class ZeroChannel(IrsSecrecyError):
    """All singular values of a channel matrix are numerically zero."""


class InfeasiblePoint(IrsSecrecyError):
    """A barrier-function argument is non-positive (point left the interior)."""


class SingularSystem(IrsSecrecyError):
    """The Newton linear system could not be solved."""


class LineSearchStalled(IrsSecrecyError):
    """Backtracking line search exhausted its iteration budget."""


class BracketFailure(IrsSecrecyError):
    """Bisection could not bracket a sign change (violated positivity invariant)."""


class IterationCap(IrsSecrecyError):
    """An iterative solver hit its iteration limit without converging."""


class InfeasibleQoS(IrsSecrecyError):
    """The rate requirement cannot be met within the allowed power budget."""


class NoNullSpace(IrsSecrecyError):
    """The effective channel leaves no null space for artificial noise."""


class InsufficientPower(IrsSecrecyError):
    """Total power budget is below the minimum power already committed."""
