"""Exception types shared across the package."""


class BalancedSetsError(Exception):
    """Base class for every error raised by this package."""


class EmptyFamily(BalancedSetsError, ValueError):
    pass


class InvalidPlan(BalancedSetsError, ValueError):
    pass


class IndexFunctionInfeasible(BalancedSetsError):
    pass


class LevelOutOfRange(BalancedSetsError, IndexError):
    pass


class DomainError(BalancedSetsError, ValueError):
    pass


class BelowResolution(BalancedSetsError, ValueError):
    """A gauge was evaluated below the smallest resolved separation ``b_N``."""

    def __init__(self, x, floor, index=None):
        self.x = x
        self.floor = floor
        self.index = index
        where = "" if index is None else f" (cover element {index})"
        super().__init__(f"x={x} is below the resolved floor b_N={floor}{where}")


class CoverageError(BalancedSetsError):
    """A cover misses at least one finest-level piece of its target."""

    def __init__(self, missed):
        self.missed = list(missed)
        first = ".".join(map(str, self.missed[0])) if self.missed else "?"
        super().__init__(f"cover misses {len(self.missed)} piece(s), first: ({first})")


class InsufficientDepth(BalancedSetsError):
    pass


class DegenerateElement(BalancedSetsError, ValueError):
    pass


class MalformedMap(BalancedSetsError, ValueError):
    pass


class NotWeakContraction(BalancedSetsError):
    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"pair {pair[0]}, {pair[1]} is not strictly contracted")


class IndexMismatch(BalancedSetsError, ValueError):
    pass


class InsufficientSamples(BalancedSetsError):
    pass


class NotCertifiable(BalancedSetsError):
    pass


class GrowthModeRequired(BalancedSetsError):
    pass


class DepthExhausted(BalancedSetsError):
    def __init__(self, x, fx, depth):
        self.x, self.fx, self.depth = x, fx, depth
        super().__init__(f"{x} and its image {fx} share a piece at every level up to {depth}")


class GaugeMismatch(BalancedSetsError, ValueError):
    pass


class ArtifactError(BalancedSetsError, ValueError):
    """Malformed or wrong-kind serialized artifact."""
