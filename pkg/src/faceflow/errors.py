"""Exception types raised deliberately by this package."""

from __future__ import annotations

__all__ = [
    "FaceflowError",
    "MalformedHeader",
    "TruncatedPayload",
    "UnsupportedMaxval",
    "EmptySequence",
    "DimensionMismatch",
    "PyramidTooDeep",
    "DegenerateGrid",
    "OutOfBounds",
    "UnknownRegion",
    "ParseError",
    "OverlappingCells",
    "CellOutOfGrid",
    "EvenWindow",
    "InvalidThreshold",
    "EmptySeries",
    "TooSmall",
    "ExcessiveShift",
    "AmplitudeTooLarge",
    "SeriesFormatError",
]


class FaceflowError(Exception):
    """Base class for every error this package raises on purpose."""


class MalformedHeader(FaceflowError):
    """Buffer does not start with a valid binary PGM/PPM header."""


class TruncatedPayload(FaceflowError):
    """Pixel payload ends before the header-declared sample count."""


class UnsupportedMaxval(FaceflowError):
    """Header maxval exceeds the 8-bit range this decoder supports."""


class EmptySequence(FaceflowError):
    """No frames matched the requested directory and pattern."""


class DimensionMismatch(FaceflowError):
    """Rasters that must share dimensions do not."""


class PyramidTooDeep(FaceflowError):
    """Image too small for the requested number of pyramid levels."""


class DegenerateGrid(FaceflowError):
    """Grid rows/cols do not fit the frame dimensions."""


class OutOfBounds(FaceflowError):
    """Pixel coordinate lies outside the frame."""


class UnknownRegion(FaceflowError):
    """Region name not present in the region map."""


class ParseError(FaceflowError):
    """Region-map text violates the line grammar."""


class OverlappingCells(FaceflowError):
    """Two regions claim the same grid cell."""


class CellOutOfGrid(FaceflowError):
    """Region references a cell outside the grid."""


class EvenWindow(FaceflowError):
    """Moving-average window must be odd."""


class InvalidThreshold(FaceflowError):
    """Event-detection parameter outside its valid range."""


class EmptySeries(FaceflowError):
    """Intensity series has no rows or no regions."""


class TooSmall(FaceflowError):
    """Requested texture dimensions below the generator minimum."""


class ExcessiveShift(FaceflowError):
    """Cumulative translation too large for the frame size."""


class AmplitudeTooLarge(FaceflowError):
    """Region displacement amplitude exceeds a quarter of the cell size."""


class SeriesFormatError(FaceflowError):
    """series.csv content does not match the expected layout."""
