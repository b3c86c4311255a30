"""Exception types raised by the corrbandit package."""


class ModelError(ValueError):
    """Base class for problems with a latent model or its derived tables."""


class EmptySpace(ModelError):
    pass


class NegativeProbability(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class ZeroMass(ModelError):
    pass


class UnknownReward(ModelError):
    """An observed reward matches no reward value of the arm."""


class NonUniqueOptimum(ModelError):
    pass


class ZeroGap(ModelError):
    pass


class NoFeasibleEpsilon(ModelError):
    """No mixing weight makes the target arm beat the optimal arm."""


class NotCompetitive(NoFeasibleEpsilon):
    """The target arm has a non-negative pseudo-gap, so no alternate instance exists."""


class DivergenceInfinite(ModelError):
    pass
