"""Exception types raised across the package."""


class FragileBanditsError(Exception):
    """Base class for all package errors."""


class DomainError(FragileBanditsError, ValueError):
    """An argument lies outside the domain of a formula."""


class AmbiguousOptimum(FragileBanditsError, ValueError):
    """Two actions maximize the log-odds of a parameter within the tie tolerance."""


class NonBijective(FragileBanditsError, ValueError):
    """Two parameters share the same optimal action."""


class ConvergenceError(FragileBanditsError, RuntimeError):
    pass


class SizeCapExceeded(FragileBanditsError, RuntimeError):
    pass


class PreconditionFailed(FragileBanditsError, ValueError):
    pass


class DegeneratePosterior(FragileBanditsError, ArithmeticError):
    """Mutual information vanishes while the one-step regret does not."""


class GenerationFailed(FragileBanditsError, RuntimeError):
    pass


class TargetUnreached(GenerationFailed):
    """A packing could not reach its requested size.

    The partial packing is kept on ``self.vectors``.
    """

    def __init__(self, message, vectors=None):
        super().__init__(message)
        self.vectors = vectors


class Infeasible(FragileBanditsError, ValueError):
    pass
