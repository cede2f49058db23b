"""Exception hierarchy shared by every module of the package."""


class PrecSpaError(Exception):
    """Base class for numerical failures raised by this package."""


class NotSymmetric(PrecSpaError, ValueError):
    pass


class NotPositiveDefinite(PrecSpaError, ValueError):
    pass


class ZeroVector(PrecSpaError, ValueError):
    pass


class NoConvergence(PrecSpaError, RuntimeError):
    """Iteration cap reached.

    ``best`` carries the last iterate when the raising routine has one
    worth returning (e.g. an :class:`~precspa.mvee.EllipsoidSolution`).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RankDeficient(PrecSpaError, ValueError):
    pass


class RankDeficientInput(RankDeficient):
    pass


class DegenerateBasis(PrecSpaError, ValueError):
    pass


class InsufficientColumns(PrecSpaError, ValueError):
    pass


class SingularAggregate(PrecSpaError, ValueError):
    pass


class ConstantVector(PrecSpaError, ValueError):
    pass


class RankDeficientWarning(UserWarning):
    """Trailing singular value is negligible relative to the leading one."""
