"""Exception types shared across the package."""


class RkposError(Exception):
    """Base class for all package-specific errors."""


class ParameterDomainError(RkposError, ValueError):
    """A method-family parameter violates its validity domain."""


class CapacityError(RkposError):
    """Variable count exceeds the subset-code limit.

    Vertex enumeration is 2**n; above the configured limit we fail loudly
    instead of silently grinding.  Randomized sampling (see rkpos.gamma)
    gives non-certified upper bounds beyond the limit.
    """


class PreconditionError(RkposError, ValueError):
    """An operation was called on inputs outside its stated hypotheses."""


class LimiterContractError(RkposError):
    """A limiter produced a negative advection coefficient.

    Signals a psi outside the 0 <= psi <= 1, 0 <= psi(t)/t <= mu contract.
    """


class InputError(RkposError, ValueError):
    """Malformed user input (missing variable values, bad shorthand, ...)."""
