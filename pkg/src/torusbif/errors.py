"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so the command line can
map them to exit status 1; configuration problems derive from
:class:`ConfigError` (exit status 2).
"""
from __future__ import annotations


class TorusBifError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(TorusBifError):
    """A computation could not produce a trustworthy result."""


class InvalidSpec(TorusBifError, ValueError):
    """A multiplier or problem specification violates a standing assumption."""


class ConfigError(TorusBifError):
    """Configuration rejected; ``errors`` lists every field-level message."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class TableOutOfRange(InvalidSpec, IndexError):
    pass


class UnsupportedMultiplier(InvalidSpec):
    pass


class UnsupportedP(InvalidSpec):
    pass


class UnsupportedRegime(InvalidSpec):
    """Requested bound is outside the range p < 4s + 1 where it is defined."""


class LambdaOutOfRange(InvalidSpec):
    pass


class ZeroLambda(InvalidSpec):
    pass


class RegularityUnavailable(InvalidSpec):
    """The requested derivative order exceeds the smoothness of |u|^p."""


class GridTooCoarse(NumericalError):
    pass


class TruncationOverflow(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, max_iter: int, last_residual: float, message: str | None = None):
        self.max_iter = max_iter
        self.last_residual = last_residual
        super().__init__(
            message
            or f"Newton did not converge in {max_iter} iterations "
            f"(last residual {last_residual:.3e})"
        )


class SingularJacobian(NumericalError):
    def __init__(self, rcond: float):
        self.rcond = rcond
        super().__init__(f"Jacobian is numerically singular (rcond={rcond:.3e})")


class StallAtMinStep(NumericalError):
    """Continuation step fell below ``ds_min``; ``branch`` holds the partial result."""

    def __init__(self, message: str, branch=None):
        self.branch = branch
        super().__init__(message)


class BoundViolation(NumericalError):
    """A hard a-priori bound failed on an accepted continuation point."""


class BlowupDetected(NumericalError):
    pass
