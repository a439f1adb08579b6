"""Exception hierarchy shared by every hlskit module."""


class HlsError(Exception):
    """Base class for all hlskit errors."""


class StructuralError(HlsError, ValueError):
    """Malformed input: bad table shape, unknown ids, broken contracts."""


class DisconnectedError(StructuralError):
    """A metric was requested on a graph with more than one component."""

    def __init__(self, a, b, what="graph"):
        self.pair = (a, b)
        super().__init__(f"{what} is disconnected: no path between {a!r} and {b!r}")


class OracleCapError(HlsError):
    """Exhaustive search refused because the instance exceeds its size cap."""


class SearchBudgetError(HlsError):
    """A bounded search ran out of budget before deciding."""


class NotSegmentLike(HlsError):
    """The leaf space does not parametrize isometrically onto a segment."""
