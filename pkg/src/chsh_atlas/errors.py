"""Exception hierarchy shared by every module."""


class ChshAtlasError(ValueError):
    """Base class for all input/contract errors raised by the package."""


class AllZeroGlobalFunction(ChshAtlasError):
    pass


class NotStochastic(ChshAtlasError):
    pass


class NotNormalized(ChshAtlasError):
    pass


class InvalidTable(ChshAtlasError):
    """A factor table has the wrong shape or a negative/non-finite entry."""


class DegenerateMarginal(ChshAtlasError):
    """A single-variable marginal is too close to 0 or 1 for the PCC to exist."""


class DisjointPairs(ChshAtlasError):
    pass


class BadWeights(ChshAtlasError):
    pass


class BadIndex(ChshAtlasError):
    pass


class NotClassicable(ChshAtlasError):
    pass


class InvalidModel(ChshAtlasError):
    """Density matrix or unitary fails its invariants."""


class BadSigns(ChshAtlasError):
    """A CHSH sign pattern is not a 4-tuple of +-1 with an odd number of -1."""


class MalformedInput(ChshAtlasError):
    """A JSON document does not follow the interchange schema."""
