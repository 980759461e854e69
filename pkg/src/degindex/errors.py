"""Exception hierarchy. Every error raised by the package derives from DEGError."""


class DEGError(Exception):
    pass


# graph structure
class OddOrTinyDegree(DEGError, ValueError):
    pass


class SelfLoop(DEGError, ValueError):
    pass


class DuplicateEdge(DEGError, ValueError):
    pass


class DegreeOverflow(DEGError, ValueError):
    pass


class MissingEdge(DEGError, KeyError):
    pass


class UnknownVertex(DEGError, IndexError):
    pass


class InconsistentLog(DEGError, RuntimeError):
    pass


class SearchOnlyGraph(DEGError, RuntimeError):
    """Raised when a graph loaded without weights is asked to mutate."""


# metric space
class DimensionMismatch(DEGError, ValueError):
    pass


# search
class EmptySeeds(DEGError, ValueError):
    pass


class UnknownSeed(DEGError, IndexError):
    pass


class EmptyGraph(DEGError, ValueError):
    pass


# construction
class NoEligibleNeighbor(DEGError, RuntimeError):
    pass


class GraphTooSmall(DEGError, ValueError):
    pass


class DatasetTooSmall(DEGError, ValueError):
    pass


class InfeasibleDegreeSequence(DEGError, ValueError):
    pass


# analysis
class KTooLarge(DEGError, ValueError):
    pass


class EmptySubset(DEGError, ValueError):
    pass


class DegenerateSubset(DEGError, ValueError):
    pass


class TooLargeToEnumerate(DEGError, ValueError):
    pass


# io
class CorruptHeader(DEGError, ValueError):
    pass


class TruncatedFile(DEGError, ValueError):
    pass


class BadMagic(DEGError, ValueError):
    pass


class VersionMismatch(DEGError, ValueError):
    pass


class NTooLarge(DEGError, ValueError):
    pass
