"""Exception types shared across the package."""


class UpwardPlanarityError(Exception):
    """Base class for all errors raised by this package."""


class SelfLoop(UpwardPlanarityError):
    def __init__(self, vertex, line=None):
        self.vertex = vertex
        self.line = line
        super().__init__(f"self-loop at vertex {vertex!r}")


class DuplicateEdge(UpwardPlanarityError):
    def __init__(self, edge, line=None):
        self.edge = edge
        self.line = line
        super().__init__(f"duplicate edge {edge!r}")


class CycleFound(UpwardPlanarityError):
    """The input digraph contains a directed cycle; ``cycle`` is a witness."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__(f"directed cycle: {' -> '.join(map(str, self.cycle))}")


class Disconnected(UpwardPlanarityError):
    def __init__(self, msg="underlying graph is disconnected"):
        super().__init__(msg)


class UnknownVertex(UpwardPlanarityError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"unknown vertex {vertex!r}")


class NonPlanarRotation(UpwardPlanarityError):
    """A rotation system failed the Euler face-count check."""


class OddSwitchCount(UpwardPlanarityError):
    """A face with an odd number of switch angles; signals a malformed embedding."""


class NotBiconnected(UpwardPlanarityError):
    pass


class NonPlanarSkeleton(UpwardPlanarityError):
    """An R-node skeleton is non-planar; the instance cannot be upward planar."""


class TurnOutOfRange(UpwardPlanarityError):
    def __init__(self, tau, lo, hi):
        self.tau = tau
        super().__init__(f"turn number {tau} outside [{lo}, {hi}]")


class NotThinRepeat(UpwardPlanarityError):
    """A repeated element of a shape sequence does not satisfy the thin conditions."""


class NotBoring(UpwardPlanarityError):
    """A feasible set contains shapes outside the boring catalog."""


class TooLarge(UpwardPlanarityError):
    """Instance exceeds the brute-force oracle's size guard."""


class NegativeDemand(UpwardPlanarityError):
    """A flow-network sink computed a negative demand; configuration rejected."""


class ParseError(UpwardPlanarityError):
    def __init__(self, msg, line=None):
        self.line = line
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
