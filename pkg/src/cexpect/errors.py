"""Exception types raised by the cexpect library.

Everything inherits from CexpectError so callers can catch library
failures with a single except clause. File-not-found conditions use the
builtin FileNotFoundError (which is also re-exported here for
discoverability).
"""

__all__ = [
    "CexpectError",
    "NotCoveringUnit",
    "NotStrictlyIncreasing",
    "TooFewPoints",
    "AllZeroComponents",
    "GridMismatch",
    "RankDeficient",
    "DidNotConverge",
    "LevelOutOfMeshRange",
    "InvalidInterval",
    "InvalidLevel",
    "MeshGridIncompatible",
    "DimensionMismatch",
    "TooManyDegenerateReplicates",
    "ParseError",
    "EmptyAfterFiltering",
    "FileNotFoundError",
]


class CexpectError(Exception):
    """Base class for all cexpect errors."""


class NotCoveringUnit(CexpectError):
    """Proportion grid does not start at 0 or does not end at 1."""


class NotStrictlyIncreasing(CexpectError):
    """Proportion grid points are not strictly increasing."""


class TooFewPoints(CexpectError):
    """Proportion grid has fewer than two points."""


class AllZeroComponents(CexpectError):
    """Contribution shares are undefined because every component is zero."""


class GridMismatch(CexpectError):
    """Two decompositions being combined were built on different grids."""


class RankDeficient(CexpectError):
    """Design matrix does not have full column rank."""


class DidNotConverge(CexpectError):
    """Quantile regression solver exhausted its iteration budget."""


class LevelOutOfMeshRange(CexpectError):
    """Requested quantile level lies outside the tabulated mesh."""


class InvalidInterval(CexpectError):
    """Integration interval violates 0 <= a < b <= 1."""


class InvalidLevel(CexpectError):
    """Quantile level outside the open interval (0, 1)."""


class MeshGridIncompatible(CexpectError):
    """Some grid interval contains no mesh level, so its component is undefined."""


class DimensionMismatch(CexpectError):
    """Vector or matrix shapes do not line up."""


class TooManyDegenerateReplicates(CexpectError):
    """A bootstrap replicate failed repeatedly after redrawing."""


class ParseError(CexpectError):
    """Tabular input could not be interpreted.

    Carries the offending position: ``row`` is the 1-based data row
    (0 for header-level problems) and ``column`` the column name or index.
    """

    def __init__(self, message, row=0, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyAfterFiltering(CexpectError):
    """Every input row was rejected; nothing left to estimate from."""
